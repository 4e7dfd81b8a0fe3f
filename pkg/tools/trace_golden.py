#!/usr/bin/env python3
"""Independent trace of the golden prediction files.

Recomputes the expected subtask-1/subtask-2 predictions for the committed
five-instance fixture run (alpha=0.7, beta=0.3, extra languages it+pt,
fixture engine, fixture-file encoder) WITHOUT importing the package under
test: only stdlib json/math/hashlib/struct/unicodedata. The alignment
outcomes are a hand-checked annotation table, not a re-run of the alignment
code, so this file is an oracle for the pipeline rather than a mirror of it.

Writes tests/fixtures/golden_subtask1.tsv and golden_subtask2.tsv.
"""
from __future__ import annotations

import hashlib
import json
import math
import struct
import sys
import unicodedata
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

ALPHA, BETA = 0.7, 0.3
LANGS = ["en", "it", "pt"]  # source first, then the configured extras

# Hand-checked alignment annotation: (instance, lang, ctx) ->
# ((surface1, occurrence1), (surface2, occurrence2)); None = unaligned word.
ALIGNMENTS = {
    ("en-001", "it", 1): (("cella", 0), ("stanza", 0)),
    ("en-001", "it", 2): (("cellule", 0), ("spazio", 0)),
    ("en-001", "pt", 1): (("cela", 0), ("quarto", 0)),
    ("en-001", "pt", 2): (("células", 0), ("espaço", 0)),
    ("en-002", "it", 1): (("riva", 0), ("costa", 0)),
    ("en-002", "it", 2): (("riva", 0), ("costa", 0)),
    ("en-002", "pt", 1): (("banco", 0), ("costa", 0)),
    ("en-002", "pt", 2): (("banco", 0), ("costa", 0)),
    ("en-003", "it", 1): (("cuore", 0), ("nucleo", 0)),
    ("en-003", "it", 2): (("cuore", 0), ("nucleo", 0)),
    ("en-003", "pt", 1): (("coração", 0), ("núcleo", 0)),
    ("en-003", "pt", 2): (("coração", 0), ("núcleo", 0)),
    ("en-004", "it", 1): (("fiasco", 0), ("bottiglia", 0)),
    ("en-004", "it", 2): (("fiasco", 0), ("bottiglia", 0)),
    ("en-004", "pt", 1): (("frasco", 0), ("garrafa", 0)),
    ("en-004", "pt", 2): (("frasco", 0), ("garrafa", 0)),
    ("en-005", "it", 1): (("primavera", 0), ("autunno", 0)),
    ("en-005", "it", 2): (None, None),
    ("en-005", "pt", 1): (("primavera", 0), ("outono", 0)),
    ("en-005", "pt", 2): (("mola", 0), ("queda", 0)),
}


def sha(text: str) -> str:
    return hashlib.sha256(
        unicodedata.normalize("NFC", text).encode("utf-8")).hexdigest()


def f32(value: str) -> float:
    """Text float as stored in float32, widened back to float64."""
    return struct.unpack("<f", struct.pack("<f", float(value)))[0]


def read_jsonl(path: Path):
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                yield json.loads(line)


def load_vectors(lang: str) -> dict[str, list[float]]:
    vocab = {}
    lines = (FIXTURES / f"vectors_{lang}.txt").read_text(encoding="utf-8").splitlines()
    for line in lines[1:]:  # header
        parts = line.split(" ")
        vocab[parts[0]] = [f32(v) for v in parts[1:]]
    return vocab


def cosine(x, y):
    nx = math.fsum(a * a for a in x)
    ny = math.fsum(b * b for b in y)
    if nx == 0.0 or ny == 0.0:
        return None
    return math.fsum(a * b for a, b in zip(x, y)) / math.sqrt(nx * ny)


def is_word_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_" or unicodedata.category(ch) == "Mn"


def word_span(text: str, word: str, occurrence: int) -> tuple[int, int]:
    seen = 0
    start = 0
    while True:
        at = text.index(word, start)
        end = at + len(word)
        if (at == 0 or not is_word_char(text[at - 1])) and \
                (end == len(text) or not is_word_char(text[end])):
            if seen == occurrence:
                return at, end
            seen += 1
        start = at + 1


def token_mean(encoding: dict, span: tuple[int, int]):
    hit = [t["vec"] for t in encoding["tokens"]
           if t["start"] < span[1] and span[0] < t["end"]]
    if not hit:
        return None
    dim = encoding["dim"]
    return [math.fsum(vec[j] for vec in hit) / len(hit) for j in range(dim)]


def main() -> None:
    instances = list(read_jsonl(FIXTURES / "instances.jsonl"))
    cache = {}
    for rec in read_jsonl(FIXTURES / "translation_cache.jsonl"):
        cache[(rec["src"], rec["tgt"], rec["sha256"])] = rec["translated_text"]
    encodings = {(rec["lang"], rec["sha256"]): rec
                 for rec in read_jsonl(FIXTURES / "encodings.jsonl")}
    stores = {lang: load_vectors(lang) for lang in LANGS}

    sheet1_lines = ["id\tchange"]
    sheet2_lines = ["id\tsim_context1\tsim_context2"]
    for inst in sorted(instances, key=lambda r: r["id"]):
        sims = []
        for ctx_index in (1, 2):
            src_text = inst[f"ctx{ctx_index}_text"]
            values = []
            for lang in LANGS:
                if lang == inst["lang"]:
                    text = src_text
                    span1 = tuple(inst[f"ctx{ctx_index}_span1"])
                    span2 = tuple(inst[f"ctx{ctx_index}_span2"])
                    surf1 = text[span1[0]:span1[1]]
                    surf2 = text[span2[0]:span2[1]]
                else:
                    text = cache[(inst["lang"], lang, sha(src_text))]
                    annotation = ALIGNMENTS[(inst["id"], lang, ctx_index)]
                    if annotation[0] is None or annotation[1] is None:
                        continue  # language excluded for this context
                    span1 = word_span(text, annotation[0][0], annotation[0][1])
                    span2 = word_span(text, annotation[1][0], annotation[1][1])
                    surf1, surf2 = annotation[0][0], annotation[1][0]
                vocab = stores[lang]
                v1 = vocab.get(surf1.lower())
                v2 = vocab.get(surf2.lower())
                we = cosine(v1, v2) if (v1 is not None and v2 is not None) else None
                enc = encodings[(lang, sha(text))]
                m1 = token_mean(enc, span1)
                m2 = token_mean(enc, span2)
                bert = cosine(m1, m2) if (m1 is not None and m2 is not None) else None
                if bert is not None and we is not None:
                    values.append(ALPHA * bert + BETA * we)
                elif bert is not None and ALPHA > 0:
                    values.append(bert)
                elif we is not None and BETA > 0:
                    values.append(we)
            if not values:
                raise SystemExit(f"no signal for {inst['id']} ctx{ctx_index}")
            sims.append(math.fsum(values) / len(values))
        sim1, sim2 = sims
        delta = sim2 - sim1
        sheet1_lines.append(f"{inst['id']}\t{delta!r}")
        sheet2_lines.append(f"{inst['id']}\t{sim1!r}\t{sim2!r}")

    (FIXTURES / "golden_subtask1.tsv").write_text("\n".join(sheet1_lines) + "\n",
                                                  encoding="utf-8")
    (FIXTURES / "golden_subtask2.tsv").write_text("\n".join(sheet2_lines) + "\n",
                                                  encoding="utf-8")
    print("\n".join(sheet1_lines))
    print("golden files written")


if __name__ == "__main__":
    sys.exit(main())
