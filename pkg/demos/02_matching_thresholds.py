"""
Constant thresholds versus the fuzzy decision
=============================================

Brute-force nearest-neighbour matching between two descriptor sets, where
each feature of A has a partner in B at a known ("planted") distance. The
number of accepted matches M grows with the threshold, and the fuzzy
decision lands between t=10 and t=15.
"""

import numpy as np

from fuzzymatch import FuzzyMatcherConfig, TrapezoidMF, match_constant, match_fuzzy
from fuzzymatch.synthetic import planted_sets

rng = np.random.default_rng(1)
distances = rng.integers(0, 25, 400)
A, B = planted_sets(400, 1000, distances, rng)

for t in (5, 10, 15):
    print(f"t={t:<3d} M={len(match_constant(A, B, t))}")
fuzzy = match_fuzzy(A, B)
print(f"fuzzy M={len(fuzzy)}")

# degrees of the accepted matches
values, counts = np.unique([round(m.degree, 2) for m in fuzzy], return_counts=True)
print("degree histogram:", {float(v): int(c) for v, c in zip(values, counts)})

# A wider LOW set moves the crossover (here to 16.5 bits)
wide = FuzzyMatcherConfig(low=TrapezoidMF(0, 0, 14, 19), high=TrapezoidMF(14, 19, 256, 256))
print(f"fuzzy (wide LOW) M={len(match_fuzzy(A, B, wide))}")
