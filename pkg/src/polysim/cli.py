"""Command-line entry point: reproducible runs from a declarative config file.

Subcommands: ingest, translate, embed, score, evaluate, sweep, greedy-langs,
compare-engines, official. All diagnostics go to stderr; data goes to files
or stdout. Exit codes: 0 success, 1 usage, 2 data error, 3 external service.
Every producing run writes a manifest (config fingerprint, input hashes, tool
version) next to its outputs; identical manifests reproduce identical bytes.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .dataset import DEFAULT_MARKERS, parse_dataset, write_canonical
from .embedstore import compile_binary, load_text_vectors, open_binary
from .encoder import FIXTURE_FILE, backend_from_config
from .errors import DataError, ExternalServiceError, PipelineError, UsageError
from .experiments import (
    OFFICIAL_CONFIGS,
    PipelineEnv,
    compare_engines,
    greedy_language_addition,
    run_official,
    sweep_alpha_beta,
)
from .metrics import POOLED, evaluate
from .scoring import (
    ExperimentConfig,
    ScoringResources,
    predict_subtask1,
    predict_subtask2,
    read_subtask1_predictions,
    read_subtask2_predictions,
    score_instances,
    write_subtask1_predictions,
    write_subtask2_predictions,
)
from .translation import (
    DEFAULT_SENTINELS,
    TranslationCache,
    build_views,
    compact_cache,
    make_client,
    write_views,
)

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_config(path: str | None) -> tuple[dict, Path]:
    if path is None:
        return {}, Path.cwd()
    config_path = Path(path)
    try:
        raw = json.loads(config_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except ValueError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})")
    return raw, config_path.parent


def _resolve(base: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def _backend_descriptor(encoder_cfg: dict) -> str:
    summary = dict(encoder_cfg)
    if "path" in summary:
        summary["path"] = Path(summary["path"]).name
    return json.dumps(summary, sort_keys=True)


class Run:
    """Everything resolved from config + flags for one invocation."""

    def __init__(self, args):
        self.args = args
        self.cfg, self.base = _load_config(args.config)
        self.out_dir = Path(args.out) if args.out else Path("out")
        self.strict = not args.lenient

    def require(self, key: str):
        if key not in self.cfg:
            raise UsageError(f"config is missing required key {key!r}")
        return self.cfg[key]

    def instances(self):
        path = _resolve(self.base, self.require("dataset"))
        fmt = self.cfg.get("format", "canonical")
        markers = tuple(self.cfg.get("markers", DEFAULT_MARKERS))
        lang = self.cfg.get("source_lang", "en")
        return parse_dataset(path, format=fmt, markers=markers, lang=lang,
                             strict=self.strict)

    def cache(self, writable: bool = False) -> TranslationCache:
        return TranslationCache(_resolve(self.base, self.require("cache")),
                                writable=writable)

    def stores(self) -> dict:
        stores = {}
        for lang, path in self.cfg.get("vectors", {}).items():
            resolved = _resolve(self.base, path)
            if resolved.suffix == ".vsbin":
                stores[lang] = open_binary(resolved)
            else:
                stores[lang] = load_text_vectors(
                    resolved, lang, limit=self.cfg.get("vector_limit")
                )
        return stores

    def encoder_config(self) -> dict:
        encoder_cfg = dict(self.require("encoder"))
        if "path" in encoder_cfg:
            encoder_cfg["path"] = str(_resolve(self.base, encoder_cfg["path"]))
        if self.args.seed is not None:
            encoder_cfg["seed"] = self.args.seed
        return encoder_cfg

    def backend(self):
        return backend_from_config(self.encoder_config())

    def sentinels(self) -> tuple[str, str]:
        return tuple(self.cfg.get("sentinels", DEFAULT_SENTINELS))

    def experiment_config(self) -> ExperimentConfig:
        return ExperimentConfig(
            alpha=float(self.cfg.get("alpha", 0.7)),
            beta=float(self.cfg.get("beta", 0.3)),
            languages=tuple(self.cfg.get("languages", [])),
            engine=self.cfg.get("engine", "fixture"),
            backend_descriptor=_backend_descriptor(self.encoder_config()),
            pooling=self.cfg.get("pooling", POOLED),
        )

    def env(self) -> PipelineEnv:
        engines_cfg = self.cfg.get("engines", {})

        def factory(engine: str):
            return make_client(engine, config=engines_cfg.get(engine))

        return PipelineEnv(
            cache=self.cache(writable=self.cfg.get("engine", "fixture") != "fixture"),
            stores=self.stores(),
            backend=self.backend(),
            client_factory=factory,
            jobs=self.args.jobs,
            sentinels=self.sentinels(),
        )

    def ensure_out(self) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir

    def write_manifest(self, name: str = "manifest.txt") -> None:
        entries = {
            "tool_version": __version__,
            "config_fingerprint": self.experiment_config().fingerprint(),
        }
        if self.args.seed is not None:
            entries["seed"] = str(self.args.seed)
        hashed = {"dataset": self.cfg.get("dataset"), "cache": self.cfg.get("cache")}
        for lang, path in self.cfg.get("vectors", {}).items():
            hashed[f"vectors_{lang}"] = path
        encoder_cfg = self.cfg.get("encoder", {})
        if encoder_cfg.get("kind") == FIXTURE_FILE:
            hashed["encoder_fixture"] = encoder_cfg.get("path")
        for key, rel in hashed.items():
            if rel is None:
                continue
            digest = hashlib.sha256(_resolve(self.base, rel).read_bytes()).hexdigest()
            entries[f"{key}_sha256"] = digest
        lines = [f"{key} = {entries[key]}" for key in sorted(entries)]
        (self.ensure_out() / name).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_ingest(run: Run) -> int:
    args = run.args
    markers = tuple(args.markers) if args.markers else tuple(
        run.cfg.get("markers", DEFAULT_MARKERS))
    instances = parse_dataset(
        args.input, format=args.format, markers=markers,
        lang=args.lang, strict=run.strict,
    )
    out_file = Path(args.out_file) if args.out_file else run.ensure_out() / "canonical.jsonl"
    write_canonical(instances, out_file)
    print(f"wrote {len(instances)} instances to {out_file}")
    return 0


def cmd_translate(run: Run) -> int:
    instances = run.instances()
    cfg = run.experiment_config()
    writable = cfg.engine != "fixture"
    cache = run.cache(writable=writable)
    client = make_client(cfg.engine, config=run.cfg.get("engines", {}).get(cfg.engine))
    languages = list(dict.fromkeys(
        [inst.source_lang for inst in instances] + list(cfg.languages)))
    batch = build_views(instances, languages, cfg.engine, cache, client=client,
                        jobs=run.args.jobs, sentinels=run.sentinels())
    out = run.ensure_out()
    write_views(batch.views, out / "views.jsonl")
    if run.args.compact:
        kept = compact_cache(cache.path)
        print(f"compacted cache to {kept} records", file=sys.stderr)
    print(f"wrote {len(batch.views)} views to {out / 'views.jsonl'}")
    if batch.errors:
        for err in batch.errors:
            print(f"error: {err.instance_id}/{err.tgt_lang}: {err.message}",
                  file=sys.stderr)
        return 3
    return 0


def cmd_embed(run: Run) -> int:
    out = run.ensure_out()
    vectors = run.require("vectors")
    for lang, path in vectors.items():
        store = load_text_vectors(_resolve(run.base, path), lang,
                                  limit=run.cfg.get("vector_limit"))
        target = out / f"vectors_{lang}.vsbin"
        compile_binary(store, target)
        print(f"compiled {len(store)} {lang} vectors (dim {store.dim}) to {target}")
    return 0


def cmd_score(run: Run) -> int:
    instances = run.instances()
    cfg = run.experiment_config()
    env = run.env()
    languages = list(dict.fromkeys(
        [inst.source_lang for inst in instances] + list(cfg.languages)))
    batch = build_views(instances, languages, cfg.engine, env.cache,
                        client=env.client_for(cfg.engine), jobs=run.args.jobs,
                        sentinels=run.sentinels())
    for err in batch.errors:
        print(f"view error: {err.instance_id}/{err.tgt_lang}: {err.message}",
              file=sys.stderr)
    resources = ScoringResources(stores=env.stores, backend=env.backend)
    scored = score_instances(instances, batch, resources, cfg)
    if not scored.sheets:
        raise DataError("no instance could be scored")
    for err in scored.errors:
        print(f"score error: {err}", file=sys.stderr)
    out = run.ensure_out()
    write_subtask1_predictions(predict_subtask1(scored.sheets), out / "subtask1.tsv")
    write_subtask2_predictions(predict_subtask2(scored.sheets), out / "subtask2.tsv")
    run.write_manifest()
    print(f"scored {len(scored.sheets)} instances -> {out}/subtask1.tsv, {out}/subtask2.tsv")
    return 0


def cmd_evaluate(run: Run) -> int:
    args = run.args
    gold = parse_dataset(args.gold, format="canonical", strict=run.strict)
    if args.subtask == 1:
        predictions = read_subtask1_predictions(args.pred)
    else:
        predictions = read_subtask2_predictions(args.pred)
    report = evaluate(predictions, gold, args.subtask, pooling=args.pooling)
    metric, value = report.headline()
    print(report.to_text())
    print(f"{metric} = {value!r}")
    if run.args.out:
        out = run.ensure_out()
        (out / f"eval_subtask{args.subtask}.jsonl").write_text(
            report.to_json_line() + "\n", encoding="utf-8")
    return 0


def _parse_grid(spec: str | None) -> list[tuple[float, float]] | None:
    if not spec:
        return None
    points = []
    for chunk in spec.split(";"):
        alpha_s, beta_s = chunk.split(",")
        points.append((float(alpha_s), float(beta_s)))
    return points


def cmd_sweep(run: Run) -> int:
    instances = run.instances()
    env = run.env()
    table = sweep_alpha_beta(
        instances, env, run.experiment_config(),
        grid=_parse_grid(run.args.grid),
        subtasks=[int(s) for s in run.args.subtasks.split(",")],
    )
    out = run.ensure_out()
    table.to_csv(out / "sweep.csv")
    run.write_manifest("sweep_manifest.txt")
    print(f"wrote {len(table.rows)} sweep rows to {out / 'sweep.csv'}")
    return 0


def cmd_greedy(run: Run) -> int:
    instances = run.instances()
    env = run.env()
    base = run.experiment_config()
    candidates = run.args.candidates.split(",") if run.args.candidates else list(base.languages)
    if not candidates:
        raise UsageError("no candidate languages: pass --candidates or set languages in config")
    trace = greedy_language_addition(instances, env, base, candidates,
                                     subtask=run.args.subtask)
    out = run.ensure_out()
    trace.to_csv(out / "greedy.csv", base)
    run.write_manifest("greedy_manifest.txt")
    print(f"kept languages: {','.join(trace.kept_languages) or '(none)'}")
    print(f"wrote {len(trace.evaluations)} evaluations to {out / 'greedy.csv'}")
    return 0


def cmd_compare_engines(run: Run) -> int:
    instances = run.instances()
    env = run.env()
    engines = run.args.engines.split(",")
    table = compare_engines(instances, env, run.experiment_config(), engines)
    out = run.ensure_out()
    table.to_csv(out / "engines.csv")
    run.write_manifest("engines_manifest.txt")
    print(f"wrote {len(table.rows)} engine rows to {out / 'engines.csv'}")
    return 0


def cmd_official(run: Run) -> int:
    if run.args.list:
        for name, (languages, alpha, beta) in OFFICIAL_CONFIGS.items():
            extra = ",".join(languages) or "none"
            print(f"{name}: extra={extra} alpha={alpha} beta={beta}")
        return 0
    if not run.args.row:
        raise UsageError("official needs a row name or --list")
    instances = run.instances()
    env = run.env()
    reports = run_official(instances, env, run.args.row, run.experiment_config())
    out = run.ensure_out()
    lines = []
    for subtask, report in sorted(reports.items()):
        print(report.to_text())
        lines.append(report.to_json_line())
    (out / f"official_{run.args.row}.jsonl").write_text(
        "\n".join(lines) + "\n", encoding="utf-8")
    run.write_manifest(f"official_{run.args.row}_manifest.txt")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="polysim", description=__doc__)
    parser.add_argument("--config", help="declarative run config (JSON)")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for the synthetic encoder backend")
    parser.add_argument("--strict", dest="lenient", action="store_false", default=False,
                        help="abort on the first malformed row (default)")
    parser.add_argument("--lenient", dest="lenient", action="store_true",
                        help="skip and log malformed rows")
    parser.add_argument("--jobs", type=int, default=1, help="parallelism budget")
    parser.add_argument("--out", help="output directory (default ./out)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="import a task file into the canonical format")
    p.add_argument("--input", required=True)
    p.add_argument("--format", default="task-tsv", choices=["task-tsv", "canonical"])
    p.add_argument("--lang", default="en")
    p.add_argument("--markers", nargs=2, metavar=("LEFT", "RIGHT"))
    p.add_argument("--out-file")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("translate", help="build/extend the cache and emit views")
    p.add_argument("--compact", action="store_true", help="dedupe the cache file")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("embed", help="compile binary vector stores")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("score", help="produce prediction files for both subtasks")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", help="score predictions against gold")
    p.add_argument("--subtask", type=int, required=True, choices=[1, 2])
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--pooling", default=POOLED)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="weight-grid ablation")
    p.add_argument("--grid", help='points as "a,b;a,b;..." (default: built-in grid)')
    p.add_argument("--subtasks", default="1,2")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("greedy-langs", help="greedy language-addition ablation")
    p.add_argument("--candidates", help="comma-separated candidate languages")
    p.add_argument("--subtask", type=int, default=2, choices=[1, 2])
    p.set_defaults(func=cmd_greedy)

    p = sub.add_parser("compare-engines", help="same config under each engine")
    p.add_argument("--engines", required=True)
    p.set_defaults(func=cmd_compare_engines)

    p = sub.add_parser("official", help="run a named official configuration")
    p.add_argument("row", nargs="?")
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_official)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(Run(args))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ExternalServiceError as exc:
        print(f"external service error: {exc}", file=sys.stderr)
        return 3
    except (PipelineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
