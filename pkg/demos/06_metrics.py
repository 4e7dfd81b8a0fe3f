"""
Evaluation metrics
==================

Subtask 1 uses the uncentered Pearson correlation over predicted vs gold
changes: scale-invariant but shift-sensitive, so the sign and magnitude of
the predicted change matter while its unit does not. Subtask 2 pools both
contexts' similarities and takes the harmonic mean of Pearson and Spearman.
"""
from polysim import PairedSeries, harmonic_mean, pearson, spearman, uncentered_pearson

gold = [0.2, 1.4, -0.8, 0.9, -1.3, 0.5]
pred = [0.1, 1.0, -0.9, 1.1, -1.0, 0.4]
s = PairedSeries.from_values(pred, gold)

p = pearson(s)
r = spearman(s)
u = uncentered_pearson(s)
print(f"pearson            {p:+.4f}")
print(f"spearman           {r:+.4f}")
print(f"uncentered pearson {u:+.4f}")
print(f"harmonic composite {harmonic_mean(p, r):+.4f}")

# Pearson does not move under positive affine transforms...
scaled = PairedSeries.from_values([3 * v + 10 for v in pred], gold)
assert abs(pearson(scaled) - p) < 1e-12

# ...Spearman does not move under any strictly monotone transform...
cubed = PairedSeries.from_values([v ** 3 for v in pred], gold)
assert abs(spearman(cubed) - r) < 1e-12

# ...and the uncentered variant tolerates scaling but NOT shifting.
rescaled = PairedSeries.from_values([3 * v for v in pred], gold)
shifted = PairedSeries.from_values([v + 1 for v in pred], gold)
assert abs(uncentered_pearson(rescaled) - u) < 1e-12
assert abs(uncentered_pearson(shifted) - u) > 1e-6
print("\ninvariance properties hold: affine (pearson), monotone (spearman),")
print("scaling-but-not-shift (uncentered pearson)")

# Ties get average ranks, the standard convention.
tied = PairedSeries.from_values([1.0, 1.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0])
print(f"\nspearman with a tie: {spearman(tied):+.4f} (average ranks)")
