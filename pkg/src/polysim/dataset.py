"""Dataset parsing: task TSV import and the canonical JSONL record format.

An instance is a word pair plus two contexts, each context marking exactly one
occurrence of each word. Spans are character offsets (Unicode scalar values),
never bytes; the marked occurrence is authoritative when a word appears more
than once. Gold scores are optional and treated as unitless reals.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError
from .textutil import common_prefix_len, match_normalize

logger = logging.getLogger(__name__)

DEFAULT_MARKERS = ("<strong>", "</strong>")

TASK_TSV = "task-tsv"
CANONICAL = "canonical"


@dataclass(frozen=True)
class MarkedContext:
    """A passage containing both target words, with their character spans."""

    text: str
    span1: tuple[int, int]
    span2: tuple[int, int]
    surface1: str
    surface2: str

    def __post_init__(self):
        for span, surface in ((self.span1, self.surface1), (self.span2, self.surface2)):
            start, end = span
            if not (0 <= start < end <= len(self.text)):
                raise DataError(f"span {span} out of range for text of length {len(self.text)}")
            if self.text[start:end] != surface:
                raise DataError(f"span {span} does not match surface {surface!r}")
        if _overlaps(self.span1, self.span2):
            raise DataError(f"spans {self.span1} and {self.span2} overlap")


@dataclass(frozen=True)
class GoldScores:
    sim1_mean: float
    sim2_mean: float

    def __post_init__(self):
        import math

        if not (math.isfinite(self.sim1_mean) and math.isfinite(self.sim2_mean)):
            raise DataError("gold scores must be finite")


@dataclass(frozen=True)
class Instance:
    id: str
    source_lang: str
    word1: str
    word2: str
    context1: MarkedContext
    context2: MarkedContext
    gold: GoldScores | None = None


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def extract_marked_spans(
    text: str, markers: tuple[str, str] = DEFAULT_MARKERS
) -> tuple[str, list[tuple[int, int]]]:
    """Strip inline markers and return (clean_text, spans in clean text).

    Raises DataError on unmatched or nested marker pairs.
    """
    left, right = markers
    clean: list[str] = []
    spans: list[tuple[int, int]] = []
    pos = 0
    out_len = 0
    while True:
        l_at = text.find(left, pos)
        r_at = text.find(right, pos)
        if l_at == -1 and r_at == -1:
            clean.append(text[pos:])
            break
        if l_at == -1 or (r_at != -1 and r_at < l_at):
            raise DataError(f"unmatched closing marker at offset {r_at}")
        clean.append(text[pos:l_at])
        out_len += l_at - pos
        inner_start = l_at + len(left)
        r_at = text.find(right, inner_start)
        if r_at == -1:
            raise DataError(f"unclosed marker at offset {l_at}")
        inner = text[inner_start:r_at]
        if left in inner:
            raise DataError(f"nested marker inside span at offset {l_at}")
        if not inner:
            raise DataError(f"empty marked span at offset {l_at}")
        clean.append(inner)
        spans.append((out_len, out_len + len(inner)))
        out_len += len(inner)
        pos = r_at + len(right)
    return "".join(clean), spans


def _assign_spans(
    text: str, spans: Sequence[tuple[int, int]], word1: str, word2: str
) -> MarkedContext:
    """Decide which of the two marked spans belongs to word1 vs word2.

    Surfaces may inflect, so matching is by normalized equality first, then by
    longest common prefix against each lemma; ties fall back to marker order.
    """
    if len(spans) != 2:
        raise DataError(f"expected exactly 2 marked spans, found {len(spans)}")
    (s_a, s_b) = spans
    surf_a = text[s_a[0] : s_a[1]]
    surf_b = text[s_b[0] : s_b[1]]

    def affinity(surface: str, lemma: str) -> tuple[int, int]:
        ns, nl = match_normalize(surface), match_normalize(lemma)
        return (1 if ns == nl else 0, common_prefix_len(ns, nl))

    straight = affinity(surf_a, word1) + affinity(surf_b, word2)
    crossed = affinity(surf_a, word2) + affinity(surf_b, word1)
    if crossed > straight:
        s_a, s_b = s_b, s_a
        surf_a, surf_b = surf_b, surf_a
    return MarkedContext(text=text, span1=s_a, span2=s_b, surface1=surf_a, surface2=surf_b)


def _parse_task_tsv_row(
    row: Sequence[str],
    columns: dict[str, int],
    row_id: str,
    lang: str,
    markers: tuple[str, str],
) -> Instance:
    def cell(name: str) -> str:
        return row[columns[name]]

    word1, word2 = cell("word1").strip(), cell("word2").strip()
    contexts = []
    for name in ("context1", "context2"):
        text, spans = extract_marked_spans(cell(name), markers)
        contexts.append(_assign_spans(text, spans, word1, word2))
    gold = None
    if "sim1" in columns and "sim2" in columns:
        raw1, raw2 = cell("sim1").strip(), cell("sim2").strip()
        if raw1 and raw2:
            gold = GoldScores(float(raw1), float(raw2))
    if "id" in columns:
        row_id = cell("id").strip()
    if "lang" in columns:
        lang = cell("lang").strip().lower()
    return Instance(
        id=row_id,
        source_lang=lang,
        word1=word1,
        word2=word2,
        context1=contexts[0],
        context2=contexts[1],
        gold=gold,
    )


def _parse_task_tsv(
    path: Path, markers: tuple[str, str], lang: str, strict: bool
) -> list[Instance]:
    instances: list[Instance] = []
    with path.open(encoding="utf-8") as handle:
        header = handle.readline()
        if not header:
            return []
        names = [c.strip().lower() for c in header.rstrip("\n").split("\t")]
        required = {"word1", "word2", "context1", "context2"}
        if not required.issubset(names):
            raise DataError(f"task TSV header missing columns {sorted(required - set(names))}")
        columns = {name: i for i, name in enumerate(names)}
        for lineno, line in enumerate(handle, start=2):
            if not line.strip():
                continue
            row = line.rstrip("\n").split("\t")
            try:
                if len(row) != len(names):
                    raise DataError(f"expected {len(names)} columns, got {len(row)}")
                instances.append(
                    _parse_task_tsv_row(row, columns, f"row{lineno}", lang, markers)
                )
            except (DataError, ValueError) as exc:
                if strict:
                    raise DataError(f"{path}:{lineno}: {exc}") from exc
                logger.warning("%s:%d: skipped row (%s)", path, lineno, exc)
    return instances


def instance_to_record(inst: Instance) -> dict:
    gold1 = inst.gold.sim1_mean if inst.gold else None
    gold2 = inst.gold.sim2_mean if inst.gold else None
    return {
        "id": inst.id,
        "lang": inst.source_lang,
        "word1": inst.word1,
        "word2": inst.word2,
        "ctx1_text": inst.context1.text,
        "ctx1_span1": list(inst.context1.span1),
        "ctx1_span2": list(inst.context1.span2),
        "ctx2_text": inst.context2.text,
        "ctx2_span1": list(inst.context2.span1),
        "ctx2_span2": list(inst.context2.span2),
        "gold_sim1": gold1,
        "gold_sim2": gold2,
    }


def instance_from_record(record: dict) -> Instance:
    def ctx(prefix: str) -> MarkedContext:
        text = record[f"{prefix}_text"]
        span1 = tuple(record[f"{prefix}_span1"])
        span2 = tuple(record[f"{prefix}_span2"])
        return MarkedContext(
            text=text,
            span1=span1,
            span2=span2,
            surface1=text[span1[0] : span1[1]],
            surface2=text[span2[0] : span2[1]],
        )

    gold = None
    if record.get("gold_sim1") is not None and record.get("gold_sim2") is not None:
        gold = GoldScores(float(record["gold_sim1"]), float(record["gold_sim2"]))
    return Instance(
        id=str(record["id"]),
        source_lang=str(record["lang"]).lower(),
        word1=record["word1"],
        word2=record["word2"],
        context1=ctx("ctx1"),
        context2=ctx("ctx2"),
        gold=gold,
    )


def _parse_canonical(path: Path, strict: bool) -> list[Instance]:
    instances: list[Instance] = []
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                instances.append(instance_from_record(json.loads(line)))
            except (DataError, ValueError, KeyError) as exc:
                if strict:
                    raise DataError(f"{path}:{lineno}: {exc}") from exc
                logger.warning("%s:%d: skipped record (%s)", path, lineno, exc)
    return instances


def parse_dataset(
    path: str | Path,
    format: str = CANONICAL,
    markers: tuple[str, str] = DEFAULT_MARKERS,
    lang: str = "en",
    strict: bool = True,
) -> list[Instance]:
    """Parse a dataset file into instances.

    ``format`` is "canonical" (JSONL) or "task-tsv" (tab-separated with inline
    word markers). Strict mode aborts on the first malformed row; lenient mode
    skips and logs it with its row number.
    """
    path = Path(path)
    if format == TASK_TSV:
        instances = _parse_task_tsv(path, markers, lang, strict)
    elif format == CANONICAL:
        instances = _parse_canonical(path, strict)
    else:
        raise DataError(f"unknown dataset format {format!r}")
    seen: dict[str, int] = {}
    for i, inst in enumerate(instances):
        if inst.id in seen:
            raise DataError(f"duplicate instance id {inst.id!r}")
        seen[inst.id] = i
    return instances


def write_canonical(instances: Iterable[Instance], path: str | Path) -> None:
    """Emit the canonical newline-delimited format; parse(write(x)) == x."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for inst in instances:
            handle.write(json.dumps(instance_to_record(inst), ensure_ascii=False))
            handle.write("\n")


def swap_contexts(inst: Instance) -> Instance:
    """The same instance with context1 and context2 (and gold) exchanged."""
    gold = None
    if inst.gold is not None:
        gold = GoldScores(inst.gold.sim2_mean, inst.gold.sim1_mean)
    return Instance(
        id=inst.id,
        source_lang=inst.source_lang,
        word1=inst.word1,
        word2=inst.word2,
        context1=inst.context2,
        context2=inst.context1,
        gold=gold,
    )
