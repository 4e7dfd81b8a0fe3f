"""Static word-vector stores and the context-free cosine channel.

Loads word2vec-style text files (optional "count dim" header) into immutable
per-language stores, with an optional binary cache for fast reopening. Cosine
is accumulated in float64 via fsum regardless of the float32 storage.
"""
from __future__ import annotations

import hashlib
import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

logger = logging.getLogger(__name__)

LOWER = "lower"
PRESERVE = "preserve"

_MAGIC = b"PSVS"
_VERSION = 1


@dataclass
class VectorStore:
    """Immutable-after-load mapping word -> dense vector for one language."""

    lang: str
    dim: int
    vocab: dict[str, np.ndarray]
    casing: str = LOWER

    def key(self, word: str) -> str:
        return word.lower() if self.casing == LOWER else word

    def lookup(self, word: str) -> np.ndarray | None:
        return self.vocab.get(self.key(word))

    def __len__(self) -> int:
        return len(self.vocab)


def load_text_vectors(
    path: str | Path,
    lang: str,
    limit: int | None = None,
    casing: str = LOWER,
) -> VectorStore:
    """Parse a word2vec-style text file: optional header, then "word v1 .. vd".

    Duplicate words keep the first occurrence; malformed lines are skipped and
    counted, but more than 0.1% malformed lines aborts the load.
    """
    path = Path(path)
    vocab: dict[str, np.ndarray] = {}
    dim: int | None = None
    total = 0
    skipped = 0
    with path.open(encoding="utf-8") as handle:
        first = handle.readline()
        if not first:
            return VectorStore(lang=lang, dim=0, vocab={}, casing=casing)
        fields = first.split()
        lines: list[str] = []
        if len(fields) == 2 and all(f.lstrip("+-").isdigit() for f in fields):
            dim = int(fields[1])
            if dim <= 0:
                raise DataError(f"{path}: non-positive dimension in header")
        else:
            lines.append(first)
        for line in lines + list(handle):
            if not line.strip():
                continue
            total += 1
            if limit is not None and len(vocab) >= limit:
                break
            parts = line.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if dim is None:
                if len(parts) < 2:
                    raise DataError(f"{path}: cannot infer dimension from first line")
                dim = len(parts) - 1
            if len(parts) != dim + 1:
                skipped += 1
                logger.warning("%s: line %d has %d fields, expected %d; skipped",
                               path, total, len(parts), dim + 1)
                continue
            word = parts[0]
            try:
                vec = np.asarray([float(v) for v in parts[1:]], dtype=np.float32)
            except ValueError:
                skipped += 1
                logger.warning("%s: line %d has non-numeric components; skipped", path, total)
                continue
            if not np.all(np.isfinite(vec)):
                skipped += 1
                logger.warning("%s: line %d has NaN/Inf components; skipped", path, total)
                continue
            key = word.lower() if casing == LOWER else word
            if key not in vocab:
                vocab[key] = vec
    if total and skipped / total > 0.001:
        raise DataError(
            f"{path}: {skipped}/{total} malformed lines exceeds the 0.1% tolerance"
        )
    if skipped:
        logger.warning("%s: skipped %d of %d lines", path, skipped, total)
    return VectorStore(lang=lang, dim=int(dim or 0), vocab=vocab, casing=casing)


def compile_binary(store: VectorStore, path: str | Path) -> None:
    """Write the binary cache: header, sorted keys, float32 payload, checksum."""
    path = Path(path)
    keys = sorted(store.vocab)
    lang_bytes = store.lang.encode("utf-8")
    keys_blob = "\n".join(keys).encode("utf-8")
    header = _MAGIC + struct.pack(
        "<IIQH", _VERSION, store.dim, len(keys), len(lang_bytes)
    ) + lang_bytes + struct.pack("<B", 0 if store.casing == LOWER else 1)
    body = struct.pack("<Q", len(keys_blob)) + keys_blob
    if keys:
        payload = np.stack([store.vocab[k] for k in keys]).astype("<f4").tobytes()
    else:
        payload = b""
    blob = header + body + payload
    digest = hashlib.sha256(blob).digest()
    with path.open("wb") as handle:
        handle.write(blob)
        handle.write(digest)


def open_binary(path: str | Path) -> VectorStore:
    """Open a compiled cache; verifies version and the trailing checksum."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 32:
        raise DataError(f"{path}: truncated vector cache")
    blob, digest = raw[:-32], raw[-32:]
    if hashlib.sha256(blob).digest() != digest:
        raise DataError(f"{path}: checksum mismatch, cache is corrupt")
    if blob[:4] != _MAGIC:
        raise DataError(f"{path}: not a vector cache (bad magic)")
    offset = 4
    version, dim, count, lang_len = struct.unpack_from("<IIQH", blob, offset)
    offset += struct.calcsize("<IIQH")
    if version != _VERSION:
        raise DataError(f"{path}: unsupported cache version {version}")
    lang = blob[offset : offset + lang_len].decode("utf-8")
    offset += lang_len
    (casing_code,) = struct.unpack_from("<B", blob, offset)
    offset += 1
    (keys_len,) = struct.unpack_from("<Q", blob, offset)
    offset += 8
    keys_blob = blob[offset : offset + keys_len]
    offset += keys_len
    keys = keys_blob.decode("utf-8").split("\n") if keys_blob else []
    payload = np.frombuffer(blob, dtype="<f4", count=count * dim, offset=offset)
    vocab = {k: payload[i * dim : (i + 1) * dim] for i, k in enumerate(keys)}
    return VectorStore(
        lang=lang, dim=dim, vocab=vocab,
        casing=LOWER if casing_code == 0 else PRESERVE,
    )


def cosine(v1, v2) -> float | None:
    """Cosine in float64 with exact (fsum) accumulation; None for zero vectors."""
    x = [float(a) for a in v1]
    y = [float(b) for b in v2]
    nx = math.fsum(a * a for a in x)
    ny = math.fsum(b * b for b in y)
    if nx == 0.0 or ny == 0.0:
        return None
    # sqrt(nx*ny) rather than sqrt(nx)*sqrt(ny): self-similarity is exactly 1.0
    return math.fsum(a * b for a, b in zip(x, y)) / math.sqrt(nx * ny)


def we_similarity(store: VectorStore, w1: str, w2: str) -> float | None:
    """Context-free cosine between two words; None when either is OOV."""
    v1 = store.lookup(w1)
    v2 = store.lookup(w2)
    if v1 is None or v2 is None:
        return None
    return cosine(v1, v2)
