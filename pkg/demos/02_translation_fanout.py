"""
Translation fan-out and word alignment
======================================

Each instance is rendered into the configured extra languages through a
cached engine, and the two target words are located in every translated
context by a three-rung ladder: exact match of the isolated-word
translation, fuzzy prefix match for inflections, and sentinel-marker
re-translation when the word translates differently in context.
"""
from pathlib import Path

from polysim import TranslationCache, build_views, parse_dataset, translate_word

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

instances = parse_dataset(FIXTURES / "instances.jsonl")
cache = TranslationCache(FIXTURES / "translation_cache.jsonl", writable=False)

# Isolated-word translations feed the ladder's first two rungs.
for lang in ("it", "pt"):
    record = translate_word("fixture", "en", lang, "cell", cache)
    print(f"cell -> {lang}: {record.translated_text}")

# Fan the prison-cell instance out to Italian and Portuguese.
batch = build_views(instances[:1], ["it", "pt"], "fixture", cache)
print()
for view in batch.views:
    print(f"{view.instance_id} -> {view.tgt_lang}")
    for index, ctx in ((1, view.ctx1), (2, view.ctx2)):
        print(f"  ctx{index}: {ctx.text[:64]}...")
        print(f"    word1 {ctx.surface1!r:12} via {ctx.method1}")
        print(f"    word2 {ctx.surface2!r:12} via {ctx.method2}")

# Context 2 shows the ladder at work: the plural "células"/"cellule" is
# recovered by the fuzzy rung, while the figurative "room" -> "espaço" /
# "spazio" needs the marker re-translation rung.
it_view = batch.views[0]
assert it_view.ctx2.method1 == "fuzzy"
assert it_view.ctx2.method2 == "marker"

# The source language itself is an identity view: no translation involved.
identity = build_views(instances[:1], ["en"], "fixture", cache).views[0]
assert identity.ctx1.text == instances[0].context1.text
print("\nidentity view for the source language preserves spans exactly")
