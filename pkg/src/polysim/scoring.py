"""Channel combination and per-instance similarity scoring.

For each language, the contextual-encoder cosine and the static-embedding
cosine are blended as alpha * bert + beta * we, and the per-language values
are averaged over the included languages. When one channel is missing for a
language, the weights renormalize to the present channel (missing means
unknown, not dissimilar); a language with no signal at all is excluded from
the average. The source language always participates: the configured language
list names only the extra languages.

Subtask 1 predicts the change sim2 - sim1; subtask 2 predicts (sim1, sim2).
Raw values are reported without clamping or rescaling - both task metrics are
invariant to the transformations that would matter.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .dataset import Instance
from .embedstore import VectorStore, we_similarity
from .encoder import TokenEncoding, bert_similarity, encode
from .errors import DataError, NoSignalError
from .translation import TranslatedView

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentConfig:
    """Weights, extra languages, and backends for one run."""

    alpha: float
    beta: float
    languages: tuple[str, ...] = ()
    engine: str = "fixture"
    backend_descriptor: str = ""
    pooling: str = "pooled"

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise DataError("alpha and beta must be non-negative")
        if self.alpha + self.beta <= 0:
            raise DataError("alpha + beta must be positive")

    def effective_languages(self, source_lang: str) -> list[str]:
        return list(dict.fromkeys([source_lang, *self.languages]))

    def fingerprint(self) -> str:
        blob = json.dumps(
            {
                "alpha": self.alpha,
                "beta": self.beta,
                "languages": list(self.languages),
                "engine": self.engine,
                "backend": self.backend_descriptor,
                "pooling": self.pooling,
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class ChannelScores:
    instance_id: str
    lang: str
    context_index: int
    sim_we: float | None
    sim_bert: float | None
    alignment_methods: tuple[str, str] = ("exact", "exact")


@dataclass(frozen=True)
class ScoreSheet:
    instance_id: str
    sim1: float
    sim2: float
    delta: float
    contributing_languages: tuple[tuple[str, ...], tuple[str, ...]]
    config_fingerprint: str


def combine(
    channels: Sequence[ChannelScores], alpha: float, beta: float
) -> tuple[float, list[str]]:
    """Average the per-language weighted blends over the included languages.

    Weights are used as given (alpha + beta need not be 1). A language whose
    only present channel carries zero weight has no signal and is excluded.
    """
    if not channels:
        raise DataError("combine needs at least one language channel")
    values: list[float] = []
    included: list[str] = []
    reasons: dict[str, str] = {}
    instance_id = channels[0].instance_id
    context_index = channels[0].context_index
    for ch in channels:
        bert, we = ch.sim_bert, ch.sim_we
        if bert is not None and we is not None:
            values.append(alpha * bert + beta * we)
        elif bert is not None and alpha > 0:
            values.append(bert)
        elif we is not None and beta > 0:
            values.append(we)
        else:
            reasons[ch.lang] = (
                "no channel present" if bert is None and we is None
                else "only zero-weight channel present"
            )
            continue
        included.append(ch.lang)
    if not included:
        raise NoSignalError(instance_id, context_index, reasons)
    return math.fsum(values) / len(values), included


@dataclass
class ScoringResources:
    """Everything score_instance reads: views, vector stores, encoder backend."""

    stores: Mapping[str, VectorStore]
    backend: object
    encoding_cache: dict = field(default_factory=dict)

    def encoding_for(self, lang: str, text: str) -> TokenEncoding:
        key = (lang, text)
        enc = self.encoding_cache.get(key)
        if enc is None:
            enc = encode(self.backend, lang, text)
            self.encoding_cache[key] = enc
        return enc


def _channel_for(
    instance: Instance,
    view: TranslatedView,
    context_index: int,
    resources: ScoringResources,
    reasons: dict[str, str],
) -> ChannelScores | None:
    ctx = view.context(context_index)
    lang = view.tgt_lang
    span1, span2 = ctx.span(1), ctx.span(2)
    surf1, surf2 = ctx.surface(1), ctx.surface(2)
    sim_we = None
    sim_bert = None
    if surf1 is None or surf2 is None:
        reasons[lang] = f"alignment failed ({ctx.method1}/{ctx.method2})"
    else:
        store = resources.stores.get(lang)
        if store is None:
            reasons.setdefault(lang, "no vector store")
        else:
            sim_we = we_similarity(store, surf1, surf2)
            if sim_we is None:
                reasons.setdefault(lang, f"embedding OOV for {surf1!r}/{surf2!r}")
        if span1 is not None and span2 is not None:
            enc = resources.encoding_for(lang, ctx.text)
            sim_bert = bert_similarity(enc, span1, span2)
            if sim_bert is None:
                reasons.setdefault(lang, "no token overlap for a word span")
    if sim_we is None and sim_bert is None:
        return None
    return ChannelScores(
        instance_id=instance.id,
        lang=lang,
        context_index=context_index,
        sim_we=sim_we,
        sim_bert=sim_bert,
        alignment_methods=(ctx.method1, ctx.method2),
    )


def score_instance(
    instance: Instance,
    views: Mapping[str, TranslatedView],
    resources: ScoringResources,
    config: ExperimentConfig,
) -> ScoreSheet:
    """Blend both channels across the effective languages for both contexts."""
    langs = config.effective_languages(instance.source_lang)
    per_context: list[tuple[float, list[str]]] = []
    for context_index in (1, 2):
        channels: list[ChannelScores] = []
        reasons: dict[str, str] = {}
        for lang in langs:
            view = views.get(lang)
            if view is None:
                reasons[lang] = "no translated view"
                continue
            ch = _channel_for(instance, view, context_index, resources, reasons)
            if ch is not None:
                channels.append(ch)
        if not channels:
            raise NoSignalError(instance.id, context_index, reasons)
        per_context.append(combine(channels, config.alpha, config.beta))
    (sim1, langs1), (sim2, langs2) = per_context
    return ScoreSheet(
        instance_id=instance.id,
        sim1=sim1,
        sim2=sim2,
        delta=sim2 - sim1,
        contributing_languages=(tuple(langs1), tuple(langs2)),
        config_fingerprint=config.fingerprint(),
    )


@dataclass
class ScoreBatch:
    sheets: list[ScoreSheet] = field(default_factory=list)
    errors: list[NoSignalError] = field(default_factory=list)


def score_instances(
    instances: Sequence[Instance],
    view_batch,
    resources: ScoringResources,
    config: ExperimentConfig,
) -> ScoreBatch:
    """Score a dataset; no-signal instances become error entries, not aborts."""
    batch = ScoreBatch()
    for instance in sorted(instances, key=lambda i: i.id):
        views = view_batch.for_instance(instance.id)
        try:
            batch.sheets.append(score_instance(instance, views, resources, config))
        except NoSignalError as exc:
            logger.warning("skipping %s: %s", instance.id, exc)
            batch.errors.append(exc)
    return batch


def predict_subtask1(sheets: Sequence[ScoreSheet]) -> dict[str, float]:
    if not sheets:
        raise DataError("no score sheets")
    return {s.instance_id: s.delta for s in sheets}


def predict_subtask2(sheets: Sequence[ScoreSheet]) -> dict[str, tuple[float, float]]:
    if not sheets:
        raise DataError("no score sheets")
    return {s.instance_id: (s.sim1, s.sim2) for s in sheets}


def write_subtask1_predictions(predictions: Mapping[str, float], path: str | Path) -> None:
    """Task-compatible TSV: id<TAB>change, one row per instance."""
    with Path(path).open("w", encoding="utf-8") as handle:
        handle.write("id\tchange\n")
        for instance_id in sorted(predictions):
            handle.write(f"{instance_id}\t{predictions[instance_id]!r}\n")


def write_subtask2_predictions(
    predictions: Mapping[str, tuple[float, float]], path: str | Path
) -> None:
    """Task-compatible TSV: id<TAB>sim_context1<TAB>sim_context2."""
    with Path(path).open("w", encoding="utf-8") as handle:
        handle.write("id\tsim_context1\tsim_context2\n")
        for instance_id in sorted(predictions):
            sim1, sim2 = predictions[instance_id]
            handle.write(f"{instance_id}\t{sim1!r}\t{sim2!r}\n")


def read_subtask1_predictions(path: str | Path) -> dict[str, float]:
    return {k: v[0] for k, v in _read_prediction_rows(path, 1).items()}


def read_subtask2_predictions(path: str | Path) -> dict[str, tuple[float, float]]:
    return {k: (v[0], v[1]) for k, v in _read_prediction_rows(path, 2).items()}


def _read_prediction_rows(path: str | Path, values: int) -> dict[str, tuple[float, ...]]:
    out: dict[str, tuple[float, ...]] = {}
    with Path(path).open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if lineno == 1 and parts[0] == "id":
                continue
            if len(parts) != values + 1:
                raise DataError(f"{path}:{lineno}: expected {values + 1} columns")
            try:
                out[parts[0]] = tuple(float(v) for v in parts[1:])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric prediction") from exc
    if not out:
        raise DataError(f"{path}: no predictions found")
    return out
