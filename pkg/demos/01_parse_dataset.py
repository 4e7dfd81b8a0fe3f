"""
Parsing task files into instances
=================================

Instances carry a word pair plus two contexts, each with exact character
spans for the marked occurrence of both words. Surfaces may inflect
relative to the lemma ("cells" for "cell"); the markup decides which
occurrence counts.
"""
from pathlib import Path

from polysim import parse_dataset, write_canonical

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

# The task ships TSV with inline <strong> markers around both target words.
instances = parse_dataset(FIXTURES / "instances.tsv", format="task-tsv")
print(f"parsed {len(instances)} instances\n")

inst = instances[0]
print(f"{inst.id}: pair = ({inst.word1!r}, {inst.word2!r})")
for name, ctx in (("context 1", inst.context1), ("context 2", inst.context2)):
    print(f"  {name}: {ctx.text}")
    print(f"    word1 span {ctx.span1} -> {ctx.surface1!r}")
    print(f"    word2 span {ctx.span2} -> {ctx.surface2!r}")

# Note the inflected surface in context 2: the lemma is "cell" but the
# marked occurrence is "cells"; spans always index the surface exactly.
assert inst.context2.surface1 == "cells"

# Round-trip through the canonical newline-delimited format.
out = Path("/tmp/demo_canonical.jsonl")
write_canonical(instances, out)
again = parse_dataset(out, format="canonical")
assert again == instances
print(f"\ncanonical round-trip OK -> {out}")
