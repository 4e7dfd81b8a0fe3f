"""
The contextual-encoder channel
==============================

Per-token vectors with character offsets come from one of three backends:
a wire-protocol client talking to an encoder sidecar, a fixture file of
frozen responses, or a synthetic-hash backend that derives deterministic
unit vectors from the text itself. A word's vector is the mean of the
tokens its span intersects, so multi-piece words are pooled
length-neutrally.
"""
from pathlib import Path

from polysim import SyntheticHashBackend, bert_similarity, encode, word_vector
from polysim.encoder import FixtureFileBackend

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

backend = SyntheticHashBackend(dim=16, seed=7)
text = "Her prison cell was almost an improvement over her room at the last hostel."
enc = encode(backend, "en", text)
print(f"{len(enc.tokens)} tokens, dim {enc.dim}, backend {enc.backend_id}")

cell = (text.index("cell"), text.index("cell") + 4)
room = (text.index("room"), text.index("room") + 4)
print(f"word vector for 'cell' has {len(word_vector(enc, cell))} components")
print(f"in-context sim(cell, room) = {bert_similarity(enc, cell, room):+.4f}")

# Deterministic by construction: the same seed always gives the same value.
again = encode(SyntheticHashBackend(dim=16, seed=7), "en", text)
assert again == enc

# The frozen fixture file serves the same contract, keyed by content hash.
frozen = FixtureFileBackend(FIXTURES / "encodings.jsonl")
enc2 = encode(frozen, "en", text)
print(f"fixture-file backend: {len(enc2.tokens)} tokens, dim {enc2.dim}")

# Self-similarity is exactly 1.0; a span in untokenized whitespace is absent.
assert bert_similarity(enc, cell, cell) == 1.0
gap = (text.index(" was"), text.index(" was") + 1)
assert word_vector(enc, gap) is None
print("span in whitespace -> None (encoded absence)")
