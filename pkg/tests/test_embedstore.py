import numpy as np
import pytest

from polysim.embedstore import (
    VectorStore,
    compile_binary,
    load_text_vectors,
    open_binary,
    we_similarity,
)
from polysim.errors import DataError


def write_vectors(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


@pytest.fixture
def small_store(tmp_path):
    path = tmp_path / "vec.txt"
    write_vectors(path, [
        "cat 1 0 0 0",
        "dog 0 1 0 0",
        "lynx 1 2 2 0",
        "wolf 2 1 2 0",
    ])
    return load_text_vectors(path, "en")


class TestLoadTextVectors:
    def test_three_line_fixture(self, tmp_path):
        path = tmp_path / "v.txt"
        write_vectors(path, ["a 1 2 3 4", "b 5 6 7 8", "c 9 8 7 6"])
        store = load_text_vectors(path, "en")
        assert len(store) == 3
        assert store.dim == 4

    def test_header_sets_dim(self, tmp_path):
        path = tmp_path / "v.txt"
        dims = " ".join(str(i % 7) for i in range(300))
        write_vectors(path, ["2 300", f"alpha {dims}", f"beta {dims}"])
        store = load_text_vectors(path, "en")
        assert store.dim == 300
        assert len(store) == 2

    def test_short_row_skipped_below_tolerance(self, tmp_path, caplog):
        lines = [f"w{i} 1 2 3" for i in range(1999)]
        lines.insert(1000, "broken 1 2")
        path = tmp_path / "v.txt"
        write_vectors(path, lines)
        store = load_text_vectors(path, "en")
        assert len(store) == 1999
        assert "broken" not in store.vocab

    def test_too_many_bad_rows_abort(self, tmp_path):
        path = tmp_path / "v.txt"
        write_vectors(path, ["a 1 2 3", "b 1 2", "c 1 2 3"])
        with pytest.raises(DataError):
            load_text_vectors(path, "en")

    def test_duplicates_keep_first(self, tmp_path):
        path = tmp_path / "v.txt"
        write_vectors(path, ["a 1 0", "a 0 1"])
        store = load_text_vectors(path, "en")
        assert list(store.lookup("a")) == [1.0, 0.0]

    def test_limit(self, tmp_path):
        path = tmp_path / "v.txt"
        write_vectors(path, [f"w{i} 1 2" for i in range(50)])
        assert len(load_text_vectors(path, "en", limit=10)) == 10

    def test_lower_casing_policy(self, tmp_path):
        path = tmp_path / "v.txt"
        write_vectors(path, ["Paris 1 0"])
        store = load_text_vectors(path, "en")
        assert store.lookup("PARIS") is not None

    def test_nonfinite_skipped(self, tmp_path):
        lines = [f"w{i} 1 2" for i in range(1500)]
        lines.append("bad nan 2")
        path = tmp_path / "v.txt"
        write_vectors(path, lines)
        store = load_text_vectors(path, "en")
        assert "bad" not in store.vocab


class TestBinaryRoundTrip:
    def test_roundtrip_lookups_equal(self, small_store, tmp_path):
        target = tmp_path / "vec.vsbin"
        compile_binary(small_store, target)
        reopened = open_binary(target)
        assert reopened.lang == small_store.lang
        assert reopened.dim == small_store.dim
        assert reopened.casing == small_store.casing
        for word, vec in small_store.vocab.items():
            assert np.array_equal(reopened.lookup(word), vec)

    def test_empty_store_roundtrip(self, tmp_path):
        store = VectorStore(lang="xx", dim=4, vocab={})
        target = tmp_path / "empty.vsbin"
        compile_binary(store, target)
        reopened = open_binary(target)
        assert len(reopened) == 0
        assert reopened.dim == 4

    def test_corruption_detected(self, small_store, tmp_path):
        target = tmp_path / "vec.vsbin"
        compile_binary(small_store, target)
        raw = bytearray(target.read_bytes())
        raw[len(raw) // 2] ^= 0xFF
        target.write_bytes(bytes(raw))
        with pytest.raises(DataError, match="checksum"):
            open_binary(target)

    def test_version_mismatch_detected(self, small_store, tmp_path):
        import hashlib
        import struct

        target = tmp_path / "vec.vsbin"
        compile_binary(small_store, target)
        raw = bytearray(target.read_bytes())[:-32]
        struct.pack_into("<I", raw, 4, 999)
        blob = bytes(raw)
        target.write_bytes(blob + hashlib.sha256(blob).digest())
        with pytest.raises(DataError, match="version"):
            open_binary(target)


class TestWeSimilarity:
    def test_self_similarity(self, small_store):
        assert we_similarity(small_store, "cat", "cat") == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self, small_store):
        assert we_similarity(small_store, "cat", "dog") == pytest.approx(0.0, abs=1e-12)

    def test_hand_value(self, small_store):
        # (1,2,2,0).(2,1,2,0) = 8; norms 3 and 3 -> 8/9
        assert we_similarity(small_store, "lynx", "wolf") == pytest.approx(8 / 9, abs=1e-12)

    def test_oov_is_none(self, small_store):
        assert we_similarity(small_store, "cat", "unknown") is None

    def test_zero_vector_is_none(self, tmp_path):
        path = tmp_path / "v.txt"
        write_vectors(path, ["zero 0 0 0 0", "one 1 1 1 1"])
        store = load_text_vectors(path, "en")
        assert we_similarity(store, "zero", "one") is None

    def test_symmetry_and_range(self, tmp_path):
        rng = np.random.default_rng(3)
        path = tmp_path / "v.txt"
        words = [f"w{i}" for i in range(20)]
        write_vectors(path, [
            w + " " + " ".join(f"{v:.6f}" for v in rng.normal(size=6)) for w in words
        ])
        store = load_text_vectors(path, "en")
        for a in words[:6]:
            for b in words[6:12]:
                ab = we_similarity(store, a, b)
                ba = we_similarity(store, b, a)
                assert ab == ba
                assert -1.0 - 1e-9 <= ab <= 1.0 + 1e-9

    def test_scale_invariance(self, small_store):
        base = we_similarity(small_store, "lynx", "wolf")
        small_store.vocab[small_store.key("lynx")] = small_store.lookup("lynx") * np.float32(7.5)
        assert we_similarity(small_store, "lynx", "wolf") == pytest.approx(base, abs=1e-9)
