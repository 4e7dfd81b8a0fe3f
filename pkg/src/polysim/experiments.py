"""Ablation procedures: weight sweeps, greedy language addition, engine
comparison, and the named official-run configurations.

Tables are emitted as CSV plot data (one row per evaluation) rather than
images; the columns match the axes of the weight-sweep, language-addition,
and engine-comparison figures.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

from .dataset import Instance
from .errors import ExternalServiceError, PipelineError
from .metrics import EvalReport, evaluate
from .scoring import (
    ExperimentConfig,
    ScoringResources,
    predict_subtask1,
    predict_subtask2,
    score_instances,
)
from .translation import TranslationCache, build_views

logger = logging.getLogger(__name__)

# The eleven extra languages of the official runs.
ELEVEN_LANGUAGES = ("en", "es", "it", "bs", "de", "el", "pl", "pt", "ru", "sr", "tr")

OFFICIAL_CONFIGS: dict[str, tuple[tuple[str, ...], float, float]] = {
    "none-0.7-0.3": ((), 0.7, 0.3),
    "pt-el-tr-ru-0.8-0.2": (("pt", "el", "tr", "ru"), 0.8, 0.2),
    "es-it-pt-de-0.6-0.4": (("es", "it", "pt", "de"), 0.6, 0.4),
    "all-0.7-0.3": (ELEVEN_LANGUAGES, 0.7, 0.3),
    "all-1.0-0.0": (ELEVEN_LANGUAGES, 1.0, 0.0),
}


def default_weight_grid() -> list[tuple[float, float]]:
    """Constrained pairs (a, 1-a) for a in 0.0..1.0 plus the official pairs."""
    grid = [(k / 10, (10 - k) / 10) for k in range(11)]
    for _, alpha, beta in OFFICIAL_CONFIGS.values():
        if (alpha, beta) not in grid:
            grid.append((alpha, beta))
    return grid


@dataclass
class PipelineEnv:
    """Shared run environment: cache, stores, encoder backend, clients."""

    cache: TranslationCache
    stores: dict
    backend: object
    client_factory: Callable[[str], object] | None = None
    jobs: int = 1
    sentinels: tuple[str, str] = ("⟦", "⟧")

    def client_for(self, engine: str):
        if self.client_factory is None:
            return None
        return self.client_factory(engine)


def run_config(
    instances: Sequence[Instance],
    env: PipelineEnv,
    config: ExperimentConfig,
    subtask: int,
) -> EvalReport:
    """Translate, score, and evaluate one configuration end to end."""
    languages: list[str] = []
    for inst in instances:
        if inst.source_lang not in languages:
            languages.append(inst.source_lang)
    for lang in config.languages:
        if lang not in languages:
            languages.append(lang)
    batch = build_views(
        instances,
        languages,
        config.engine,
        env.cache,
        client=env.client_for(config.engine),
        jobs=env.jobs,
        sentinels=env.sentinels,
    )
    for err in batch.errors:
        logger.warning("view error %s/%s: %s", err.instance_id, err.tgt_lang, err.message)
    resources = ScoringResources(stores=env.stores, backend=env.backend)
    scored = score_instances(instances, batch, resources, config)
    if not scored.sheets:
        raise PipelineError("no instance produced a score sheet")
    if subtask == 1:
        predictions = predict_subtask1(scored.sheets)
    else:
        predictions = predict_subtask2(scored.sheets)
    scored_ids = set(predictions)
    gold = [inst for inst in instances if inst.id in scored_ids]
    return evaluate(predictions, gold, subtask, pooling=config.pooling)


@dataclass(frozen=True)
class ExperimentRow:
    config_fingerprint: str
    languages: tuple[str, ...]
    alpha: float
    beta: float
    engine: str
    subtask: int
    metric: str
    value: float | None
    n: int
    flags: str = ""


CSV_COLUMNS = (
    "config_fingerprint", "languages", "alpha", "beta", "engine",
    "subtask", "metric", "value", "n", "flags",
)


def write_rows_csv(rows: Sequence[ExperimentRow], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([
                row.config_fingerprint,
                "+".join(row.languages),
                repr(row.alpha),
                repr(row.beta),
                row.engine,
                row.subtask,
                row.metric,
                "" if row.value is None else repr(row.value),
                row.n,
                row.flags,
            ])


def _row_for(config: ExperimentConfig, subtask: int,
             report: EvalReport | None, error: str = "") -> ExperimentRow:
    if report is None:
        return ExperimentRow(
            config_fingerprint=config.fingerprint(),
            languages=config.languages,
            alpha=config.alpha,
            beta=config.beta,
            engine=config.engine,
            subtask=subtask,
            metric="",
            value=None,
            n=0,
            flags=f"failed:{error}",
        )
    metric, value = report.headline()
    return ExperimentRow(
        config_fingerprint=config.fingerprint(),
        languages=config.languages,
        alpha=config.alpha,
        beta=config.beta,
        engine=config.engine,
        subtask=subtask,
        metric=metric,
        value=value,
        n=report.n,
        flags="|".join(report.flags),
    )


@dataclass
class SweepTable:
    rows: list[ExperimentRow] = field(default_factory=list)

    def to_csv(self, path: str | Path) -> None:
        write_rows_csv(self.rows, path)


def sweep_alpha_beta(
    instances: Sequence[Instance],
    env: PipelineEnv,
    base_config: ExperimentConfig,
    grid: Sequence[tuple[float, float]] | None = None,
    subtasks: Sequence[int] = (1, 2),
) -> SweepTable:
    """One evaluation per (grid point, subtask); failures become marked cells."""
    points = list(grid) if grid is not None else default_weight_grid()
    if not points:
        raise PipelineError("empty weight grid")
    tasks = [((alpha, beta), subtask) for (alpha, beta) in points for subtask in subtasks]

    def run(task):
        (alpha, beta), subtask = task
        try:
            config = replace(base_config, alpha=alpha, beta=beta)
            return _row_for(config, subtask, run_config(instances, env, config, subtask))
        except PipelineError as exc:
            failed = ExperimentRow(
                config_fingerprint="", languages=base_config.languages,
                alpha=alpha, beta=beta, engine=base_config.engine,
                subtask=subtask, metric="", value=None, n=0,
                flags=f"failed:{exc}",
            )
            return failed

    if env.jobs > 1:
        with ThreadPoolExecutor(max_workers=env.jobs) as pool:
            rows = list(pool.map(run, tasks))
    else:
        rows = [run(t) for t in tasks]
    return SweepTable(rows=rows)


@dataclass
class GreedyEvaluation:
    iteration: int
    languages: tuple[str, ...]
    score: float | None
    selected: bool = False
    error: str = ""


@dataclass
class GreedyTrace:
    subtask: int
    evaluations: list[GreedyEvaluation] = field(default_factory=list)
    kept_languages: tuple[str, ...] = ()
    kept_scores: list[float] = field(default_factory=list)

    def to_rows(self, base_config: ExperimentConfig) -> list[ExperimentRow]:
        rows = []
        for ev in self.evaluations:
            config = replace(base_config, languages=ev.languages)
            rows.append(ExperimentRow(
                config_fingerprint=config.fingerprint(),
                languages=ev.languages,
                alpha=base_config.alpha,
                beta=base_config.beta,
                engine=base_config.engine,
                subtask=self.subtask,
                metric="uncentered_pearson" if self.subtask == 1 else "harmonic_mean",
                value=ev.score,
                n=0 if ev.score is None else ev.iteration,
                flags=("selected" if ev.selected else "") + (f"|failed:{ev.error}" if ev.error else ""),
            ))
        return rows

    def to_csv(self, path: str | Path, base_config: ExperimentConfig) -> None:
        write_rows_csv(self.to_rows(base_config), path)


def greedy_language_addition(
    instances: Sequence[Instance],
    env: PipelineEnv,
    base_config: ExperimentConfig,
    candidate_langs: Sequence[str],
    subtask: int,
    tolerance: float = 1e-12,
) -> GreedyTrace:
    """Add one extra language at a time, keeping the biggest strict gain.

    Iteration 0 scores the source language alone. Each following iteration
    evaluates every remaining candidate; the argmax is kept (ties broken by
    candidate-list order) until no candidate improves the score by more than
    the tolerance. A candidate whose run fails is skipped that iteration.
    """
    base = replace(base_config, languages=())
    trace = GreedyTrace(subtask=subtask)
    current_score = run_config(instances, env, base, subtask).headline()[1]
    trace.evaluations.append(
        GreedyEvaluation(iteration=0, languages=(), score=current_score, selected=True)
    )
    trace.kept_scores.append(current_score)
    kept: list[str] = []
    remaining = list(dict.fromkeys(candidate_langs))
    iteration = 0
    while remaining:
        iteration += 1
        evaluations: list[GreedyEvaluation] = []

        def run(cand: str) -> GreedyEvaluation:
            languages = tuple(kept + [cand])
            try:
                config = replace(base, languages=languages)
                score = run_config(instances, env, config, subtask).headline()[1]
                return GreedyEvaluation(iteration=iteration, languages=languages, score=score)
            except PipelineError as exc:
                logger.warning("greedy candidate %s failed: %s", cand, exc)
                return GreedyEvaluation(
                    iteration=iteration, languages=languages, score=None, error=str(exc)
                )

        if env.jobs > 1:
            with ThreadPoolExecutor(max_workers=env.jobs) as pool:
                evaluations = list(pool.map(run, remaining))
        else:
            evaluations = [run(c) for c in remaining]
        trace.evaluations.extend(evaluations)
        best: GreedyEvaluation | None = None
        for ev in evaluations:
            if ev.score is None:
                continue
            if best is None or ev.score > best.score:
                best = ev
        if best is None or best.score <= current_score + tolerance:
            break
        best.selected = True
        kept.append(best.languages[-1])
        remaining.remove(best.languages[-1])
        current_score = best.score
        trace.kept_scores.append(current_score)
    trace.kept_languages = tuple(kept)
    return trace


@dataclass
class EngineTable:
    rows: list[ExperimentRow] = field(default_factory=list)

    def to_csv(self, path: str | Path) -> None:
        write_rows_csv(self.rows, path)


def compare_engines(
    instances: Sequence[Instance],
    env: PipelineEnv,
    config: ExperimentConfig,
    engines: Sequence[str],
    subtasks: Sequence[int] = (1, 2),
) -> EngineTable:
    """Evaluate the identical configuration under each engine.

    Rows are grouped per (engine, source language, subtask); per-engine
    failures are isolated into failed rows.
    """
    groups: dict[str, list[Instance]] = {}
    for inst in instances:
        groups.setdefault(inst.source_lang, []).append(inst)
    rows: list[ExperimentRow] = []
    for engine in engines:
        engine_config = replace(config, engine=engine)
        for lang in sorted(groups):
            for subtask in subtasks:
                try:
                    report = run_config(groups[lang], env, engine_config, subtask)
                    row = _row_for(engine_config, subtask, report)
                except PipelineError as exc:
                    row = _row_for(engine_config, subtask, None, error=str(exc))
                rows.append(replace(row, languages=(lang, *row.languages)))
    return EngineTable(rows=rows)


def run_official(
    instances: Sequence[Instance],
    env: PipelineEnv,
    row_name: str,
    base_config: ExperimentConfig,
    subtasks: Sequence[int] = (1, 2),
) -> dict[int, EvalReport]:
    """Run one named official configuration end to end.

    At desk scale this runs on fixtures; the numbers are not expected to match
    the published full-scale results, which need live translation and real
    model inference over the complete data.
    """
    if row_name not in OFFICIAL_CONFIGS:
        raise PipelineError(
            f"unknown official row {row_name!r}; choose from {sorted(OFFICIAL_CONFIGS)}"
        )
    languages, alpha, beta = OFFICIAL_CONFIGS[row_name]
    config = replace(base_config, languages=languages, alpha=alpha, beta=beta)
    reports: dict[int, EvalReport] = {}
    for subtask in subtasks:
        try:
            reports[subtask] = run_config(instances, env, config, subtask)
        except ExternalServiceError as exc:
            raise ExternalServiceError(
                f"official row {row_name} needs resources that are missing: {exc}. "
                "Prime the translation cache and encoder fixtures for all "
                "configured languages, or configure live engine credentials "
                "and a running encoder sidecar."
            ) from exc
    return reports
