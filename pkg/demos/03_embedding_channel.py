"""
The static word-embedding channel
=================================

Context-free cosine similarity over per-language pre-trained vectors in
the word2vec text format. Out-of-vocabulary queries are an encoded
absence, never NaN; the scoring layer decides how absence propagates.
"""
from pathlib import Path

from polysim import load_text_vectors, we_similarity
from polysim.embedstore import compile_binary, open_binary

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

store = load_text_vectors(FIXTURES / "vectors_pt.txt", "pt")
print(f"pt store: {len(store)} words, dim {store.dim}")

for w1, w2 in [("cela", "quarto"), ("células", "espaço"), ("coração", "núcleo")]:
    print(f"  sim({w1!r}, {w2!r}) = {we_similarity(store, w1, w2):+.4f}")

# Identical words are exactly 1.0; OOV is None, not a number.
assert we_similarity(store, "cela", "cela") == 1.0
assert we_similarity(store, "cela", "inexistente") is None
print("  OOV -> None (encoded absence)")

# A binary cache reopens to the same lookups, guarded by a checksum.
target = Path("/tmp/demo_vectors_pt.vsbin")
compile_binary(store, target)
reopened = open_binary(target)
assert (reopened.lookup("cela") == store.lookup("cela")).all()
print(f"\nbinary cache round-trip OK -> {target}")
