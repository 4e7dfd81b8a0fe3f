"""
Ablation harnesses
==================

Three procedures probe the pipeline: sweeping the channel weights, greedily
adding one extra language at a time while it strictly helps, and running the
identical configuration under different translation engines. Each emits CSV
plot data (x = weight, language count, or engine; y = correlation).
"""
from pathlib import Path

from polysim import ExperimentConfig, parse_dataset
from polysim.embedstore import load_text_vectors
from polysim.encoder import FixtureFileBackend
from polysim.experiments import (
    OFFICIAL_CONFIGS,
    PipelineEnv,
    greedy_language_addition,
    run_official,
    sweep_alpha_beta,
)
from polysim.translation import TranslationCache

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

instances = parse_dataset(FIXTURES / "instances.jsonl")
env = PipelineEnv(
    cache=TranslationCache(FIXTURES / "translation_cache.jsonl", writable=False),
    stores={lang: load_text_vectors(FIXTURES / f"vectors_{lang}.txt", lang)
            for lang in ("en", "it", "pt")},
    backend=FixtureFileBackend(FIXTURES / "encodings.jsonl"),
)
base = ExperimentConfig(alpha=0.7, beta=0.3, languages=("it", "pt"), engine="fixture")

# Weight sweep over constrained (alpha, 1-alpha) pairs.
grid = [(k / 10, (10 - k) / 10) for k in range(0, 11, 2)]
table = sweep_alpha_beta(instances, env, base, grid=grid, subtasks=[2])
print("alpha  beta   subtask-2 composite")
for row in table.rows:
    print(f" {row.alpha:.1f}   {row.beta:.1f}   {row.value:+.4f}")
table.to_csv("/tmp/demo_sweep.csv")

# Greedy language addition starting from the source language alone.
trace = greedy_language_addition(instances, env, base, ["it", "pt"], subtask=2)
print(f"\ngreedy kept: {trace.kept_languages or '(none)'}")
for ev in trace.evaluations:
    mark = " <- kept" if ev.selected else ""
    print(f"  iter {ev.iteration}: +{','.join(ev.languages) or 'source only'} "
          f"-> {ev.score:+.4f}{mark}")

# The named official configurations run end to end on whatever resources are
# primed; at this desk scale the numbers are fixture artifacts, not the
# published full-scale results.
print(f"\nofficial rows available: {', '.join(OFFICIAL_CONFIGS)}")
reports = run_official(instances, env, "none-0.7-0.3", base)
for subtask, report in sorted(reports.items()):
    name, value = report.headline()
    print(f"  none-0.7-0.3 subtask {subtask}: {name} = {value:+.4f}")
