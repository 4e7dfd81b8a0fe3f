"""Correlation metrics and the two composite task scores.

Subtask 1 is scored with the uncentered Pearson correlation (cosine of the
raw prediction and gold vectors). Subtask 2 is scored with the harmonic mean
of the centered Pearson and the Spearman correlations. All sums go through
``math.fsum`` so results are correctly rounded and order-independent.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .dataset import Instance
from .errors import DataError, UndefinedCorrelationError

POOLED = "pooled"
MEAN_OF_CONTEXTS = "mean-of-contexts"


@dataclass(frozen=True)
class PairedSeries:
    """Predicted and gold values in parallel order."""

    predicted: tuple[float, ...]
    gold: tuple[float, ...]
    ids: tuple[str, ...]

    @classmethod
    def from_values(
        cls,
        predicted: Sequence[float],
        gold: Sequence[float],
        ids: Sequence[str] | None = None,
    ) -> "PairedSeries":
        pred = tuple(float(v) for v in predicted)
        gld = tuple(float(v) for v in gold)
        if ids is None:
            ids = tuple(str(i) for i in range(len(pred)))
        else:
            ids = tuple(str(i) for i in ids)
        if not (len(pred) == len(gld) == len(ids)):
            raise DataError("paired series lengths differ")
        if len(pred) < 2:
            raise DataError("paired series needs at least 2 points")
        if any(not math.isfinite(v) for v in pred + gld):
            raise DataError("paired series contains NaN/Inf")
        return cls(pred, gld, ids)


def _centered(values: Sequence[float]) -> list[float]:
    mean = math.fsum(values) / len(values)
    return [v - mean for v in values]


def pearson(s: PairedSeries) -> float:
    """Centered Pearson r; raises if either series has zero variance."""
    dx = _centered(s.predicted)
    dy = _centered(s.gold)
    sxx = math.fsum(v * v for v in dx)
    syy = math.fsum(v * v for v in dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("pearson undefined: zero-variance series")
    return math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)


def average_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks; ties receive the mean of the rank positions they occupy."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(s: PairedSeries) -> float:
    """Pearson over average ranks."""
    ranked = PairedSeries.from_values(
        average_ranks(s.predicted), average_ranks(s.gold), s.ids
    )
    try:
        return pearson(ranked)
    except UndefinedCorrelationError:
        raise UndefinedCorrelationError("spearman undefined: a series is constant")


def uncentered_pearson(s: PairedSeries) -> float:
    """Cosine of the raw vectors: sum(x*y) / (||x|| * ||y||). Shift-sensitive."""
    nx = math.fsum(v * v for v in s.predicted)
    ny = math.fsum(v * v for v in s.gold)
    if nx == 0.0 or ny == 0.0:
        raise UndefinedCorrelationError("uncentered pearson undefined: zero-norm series")
    # sqrt(nx*ny): identical series score exactly 1.0
    return math.fsum(a * b for a, b in zip(s.predicted, s.gold)) / math.sqrt(nx * ny)


def harmonic_mean(p: float, s: float) -> float:
    """2ps/(p+s). Values <= 0 are computed anyway; callers flag them."""
    if p + s == 0.0:
        raise UndefinedCorrelationError("harmonic mean undefined: p + s == 0")
    return 2.0 * p * s / (p + s)


@dataclass
class EvalReport:
    """Flat record of one evaluation run."""

    subtask: int
    n: int
    metrics: dict[str, float]
    flags: list[str] = field(default_factory=list)
    pooling: str | None = None

    def headline(self) -> tuple[str, float]:
        name = "uncentered_pearson" if self.subtask == 1 else "harmonic_mean"
        return name, self.metrics[name]

    def to_text(self) -> str:
        lines = [f"subtask {self.subtask}  (n = {self.n})"]
        if self.pooling:
            lines.append(f"pooling = {self.pooling}")
        width = max(len(k) for k in self.metrics)
        for name, value in self.metrics.items():
            lines.append(f"  {name:<{width}}  {value!r}")
        if self.flags:
            lines.append("flags: " + ", ".join(self.flags))
        return "\n".join(lines)

    def to_json_line(self) -> str:
        record = {
            "subtask": self.subtask,
            "n": self.n,
            "pooling": self.pooling,
            "flags": self.flags,
        }
        record.update(self.metrics)
        return json.dumps(record, ensure_ascii=False, sort_keys=True)


def _gold_map(gold_instances: Sequence[Instance]) -> dict[str, tuple[float, float]]:
    out: dict[str, tuple[float, float]] = {}
    for inst in gold_instances:
        if inst.gold is None:
            raise DataError(f"instance {inst.id!r} has no gold scores")
        out[inst.id] = (inst.gold.sim1_mean, inst.gold.sim2_mean)
    return out


def _subtask2_composite(s: PairedSeries) -> tuple[dict[str, float], list[str]]:
    p = pearson(s)
    r = spearman(s)
    h = harmonic_mean(p, r)
    flags = []
    if p <= 0.0 or r <= 0.0:
        flags.append("non-interpretable-harmonic")
    return {"pearson": p, "spearman": r, "harmonic_mean": h}, flags


def evaluate(
    predictions: Mapping[str, float] | Mapping[str, tuple[float, float]],
    gold_instances: Sequence[Instance],
    subtask: int,
    pooling: str = POOLED,
) -> EvalReport:
    """Score predictions against gold.

    Subtask 1 predictions map id -> delta; subtask 2 map id -> (sim1, sim2).
    Gold deltas are gold_sim2 - gold_sim1, matching the prediction convention.
    """
    gold = _gold_map(gold_instances)
    missing = sorted(set(predictions) - set(gold))
    if missing:
        raise DataError(f"predictions for unknown ids: {missing[:5]}")
    ids = sorted(predictions)
    if subtask == 1:
        series = PairedSeries.from_values(
            [predictions[i] for i in ids],
            [gold[i][1] - gold[i][0] for i in ids],
            ids,
        )
        value = uncentered_pearson(series)
        return EvalReport(subtask=1, n=len(ids), metrics={"uncentered_pearson": value})
    if subtask != 2:
        raise DataError(f"unknown subtask {subtask!r}")

    sim1 = {i: predictions[i][0] for i in ids}
    sim2 = {i: predictions[i][1] for i in ids}
    if pooling == POOLED:
        pooled = PairedSeries.from_values(
            [sim1[i] for i in ids] + [sim2[i] for i in ids],
            [gold[i][0] for i in ids] + [gold[i][1] for i in ids],
            [f"{i}#1" for i in ids] + [f"{i}#2" for i in ids],
        )
        metrics, flags = _subtask2_composite(pooled)
        return EvalReport(subtask=2, n=len(ids), metrics=metrics, flags=flags, pooling=pooling)
    if pooling == MEAN_OF_CONTEXTS:
        per_context = []
        flags: list[str] = []
        metrics: dict[str, float] = {}
        for ctx, sims in ((1, sim1), (2, sim2)):
            series = PairedSeries.from_values(
                [sims[i] for i in ids], [gold[i][ctx - 1] for i in ids], ids
            )
            ctx_metrics, ctx_flags = _subtask2_composite(series)
            per_context.append(ctx_metrics["harmonic_mean"])
            for name, value in ctx_metrics.items():
                metrics[f"{name}_ctx{ctx}"] = value
            flags.extend(f"{f}-ctx{ctx}" for f in ctx_flags)
        metrics["harmonic_mean"] = math.fsum(per_context) / 2.0
        return EvalReport(subtask=2, n=len(ids), metrics=metrics, flags=flags, pooling=pooling)
    raise DataError(f"unknown pooling variant {pooling!r}")
