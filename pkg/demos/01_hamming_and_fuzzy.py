"""
Hamming quantities and the fuzzy match decision
===============================================

Two 256-bit descriptors are compared position by position. The counts
f00, f01, f10, f11 give both the Hamming distance (f01 + f10) and the
agreement ratio ((f00 + f11) / 256). The fuzzy system then turns a distance
into a match degree through the LOW / HIGH membership functions.
"""

import numpy as np

from fuzzymatch import FuzzyMatcherConfig, agreement_ratio, bit_counts, hamming_bits
from fuzzymatch.fuzzy import mf_eval, sugeno_infer
from fuzzymatch.synthetic import flip_bits

rng = np.random.default_rng(0)

# a descriptor and a copy with 11 bits flipped
a = rng.integers(0, 256, 32, dtype=np.uint8)
b = flip_bits(a, 11, rng)

f00, f01, f10, f11 = bit_counts(a, b)
print(f"f00={f00} f01={f01} f10={f10} f11={f11}")
print("hamming distance:", hamming_bits(a, b))
print("agreement ratio :", agreement_ratio(a, b))

# The default memberships: LOW = (0, 0, 10, 15), HIGH = (10, 15, 256, 256).
# Both ramps meet at 12.5 bits, where the degree is exactly 0.5.
cfg = FuzzyMatcherConfig()
print("\n d   LOW   HIGH  degree  match")
for d in range(0, 21):
    degree = sugeno_infer(cfg, d)
    print(f"{d:2d}  {mf_eval(cfg.low, d):.2f}  {mf_eval(cfg.high, d):.2f}  {degree:6.2f}"
          f"  {'yes' if degree >= cfg.cutoff else 'no'}")

# With two rules and 0/1 singletons the hard decision is a crisp threshold at
# the crossover; the degree is still useful as a confidence value.
