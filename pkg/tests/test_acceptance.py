"""Acceptance gate. Each criterion prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` (or ``-v``). Criteria
that need the Oxford affine sequences read them from the directory named by
``FUZZYMATCH_DATASET`` (a sequence directory or a parent of several) and are
skipped when it is unset.
"""
import os
import time

import numpy as np
import pytest

from fuzzymatch.features import agreement_ratio, hamming_bits
from fuzzymatch.fuzzy import FuzzyMatcherConfig, fuzzy_decide, sugeno_infer
from fuzzymatch.geometry import (Homography, apply, count_correct, dlt,
                                 ransac_homography, reprojection_errors)
from fuzzymatch.harness import evaluate
from fuzzymatch.matcher import MatchCandidate, match_constant, match_fuzzy
from fuzzymatch.synthetic import planted_sets, random_descriptors, write_dataset

DATASET = os.environ.get("FUZZYMATCH_DATASET")
needs_dataset = pytest.mark.skipif(not DATASET, reason="FUZZYMATCH_DATASET not set")


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
        return ok
    return emit


def random_homography(rng):
    m = np.eye(3)
    m[:2, :2] += rng.uniform(-0.25, 0.25, (2, 2))
    m[:2, 2] = rng.uniform(-60, 60, 2)
    m[2, :2] = rng.uniform(-5e-4, 5e-4, 2)
    return Homography(m)


def as_set(matches):
    return {(m.index_a, m.index_b, m.distance_bits) for m in matches}


def test_c1_hamming_oracle(report):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    a = rng.integers(0, 256, (100_000, 32), dtype=np.uint8)
    b = rng.integers(0, 256, (100_000, 32), dtype=np.uint8)
    # bit-by-bit oracle: unpack every position and compare
    oracle = (np.unpackbits(a, axis=1) != np.unpackbits(b, axis=1)).sum(axis=1)
    fast = hamming_bits(a, b)
    ratios = np.array([agreement_ratio(x, y) for x, y in zip(a[:2000], b[:2000])])
    elapsed = time.perf_counter() - start
    ok = (np.array_equal(fast, oracle)
          and np.all(fast[:2000] + 256 * ratios == 256)
          and np.all(fast + 256 * ((256 - fast) / 256) == 256)
          and elapsed < 1.0)
    assert report("C1 hamming == bit-loop oracle on 1e5 pairs", ok,
                  f"mismatches={int(np.sum(fast != oracle))}, runtime={elapsed:.3f}s")


def test_c2_fuzzy_sweep(report):
    cfg = FuzzyMatcherConfig()
    d = np.arange(257)
    decision, degree = fuzzy_decide(cfg, d)
    scalar = [fuzzy_decide(cfg, int(x)) for x in d]
    ok = (np.array_equal(decision, d <= 12.5)
          and all(s == (bool(m), float(g)) for s, m, g in zip(scalar, decision, degree))
          and np.all(np.diff(degree) <= 0)
          and np.all((degree >= 0) & (degree <= 1))
          and sugeno_infer(cfg, 12.5) == 0.5)
    assert report("C2 fuzzy sweep d=0..256", ok,
                  f"accepted d in [0, {int(d[decision].max())}]")


def synthetic_set_pairs(n_pairs=12):
    for seed in range(n_pairs):
        rng = np.random.default_rng(1000 + seed)
        n_a, n_b = rng.integers(200, 600, 2)
        planted = rng.integers(0, 30, min(n_a, n_b) // 2)
        yield planted_sets(n_a, n_b, planted, rng)


def test_c3_sandwich_synthetic(report):
    rows = []
    for A, B in synthetic_set_pairs():
        m = [len(match_constant(A, B, t)) for t in (5, 10)] + [len(match_fuzzy(A, B))] + \
            [len(match_constant(A, B, 15))]
        rows.append(m)
    ok = all(r[0] <= r[1] <= r[2] <= r[3] for r in rows)
    assert report("C3 M(t5) <= M(t10) <= M(fuzzy) <= M(t15), 12 synthetic pairs", ok,
                  f"rows={rows}")


def test_c3_sandwich_synthetic_images(report, tmp_path):
    write_dataset(tmp_path / "scene", seed=77, noise=4.0, jitter=0.12)
    recs = evaluate(tmp_path / "scene")
    by_pair = {}
    for r in recs:
        by_pair.setdefault(r.pair, {})[r.mode] = r.M
    ok = all(m["t5"] <= m["t10"] <= m["fuzzy"] <= m["t15"] for m in by_pair.values())
    assert report("C3 sandwich on a synthetic image sequence", ok, f"{by_pair}")


@needs_dataset
def test_c3_sandwich_dataset(report):
    recs = evaluate(DATASET, ransac_iters=0)
    by_pair = {}
    for r in recs:
        by_pair.setdefault((r.dataset, r.pair), {})[r.mode] = r.M
    bad = [k for k, m in by_pair.items()
           if not m["t5"] <= m["t10"] <= m["fuzzy"] <= m["t15"]]
    assert report("C3 sandwich on the real dataset", not bad,
                  f"{len(by_pair)} pairs, violations={bad}")


def test_c4_fuzzy_crisp_equivalence(report):
    inputs = list(synthetic_set_pairs())
    rng = np.random.default_rng(4)
    for _ in range(20):
        B = random_descriptors(int(rng.integers(1, 80)), rng)
        A = B[rng.integers(0, len(B), int(rng.integers(0, 80)))].copy()
        # flip a few bits so distances straddle the crossover
        A ^= (rng.random(A.shape) < 0.02).astype(np.uint8) << rng.integers(0, 8, A.shape,
                                                                          dtype=np.uint8)
        inputs.append((A, B))
    ok = all(as_set(match_fuzzy(A, B)) == as_set(match_constant(A, B, 13))
             for A, B in inputs)
    assert report("C4 match_fuzzy(default) == match_constant(t=13)", ok,
                  f"{len(inputs)} input pairs")


def test_c5_dlt_recovery(report):
    worst = 0.0
    passed = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        H = random_homography(rng)
        src = rng.uniform(0, 640, (20, 2))
        dst = apply(H, src)
        err = reprojection_errors(dlt(src, dst), src, dst).max()
        worst = max(worst, err)
        passed += err < 1e-8
    assert report("C5 DLT 20 noiseless points, max reprojection < 1e-8 px", passed == 100,
                  f"{passed}/100 seeds, worst={worst:.2e} px")


def test_c6_ransac(report):
    start = time.perf_counter()
    passed = 0
    deterministic = True
    matches = [MatchCandidate(i, i, 0) for i in range(200)]
    for seed in range(1, 101):
        rng = np.random.default_rng(seed)
        H = random_homography(rng)
        src = rng.uniform(0, 640, (200, 2))
        dst = apply(H, src)
        bad = rng.choice(200, 60, replace=False)
        dst[bad] = rng.uniform(0, 640, (60, 2))
        good = np.ones(200, bool)
        good[bad] = False
        est, flags = ransac_homography(matches, src, dst, iters=2000, inlier_eps=3.0,
                                       seed=seed)
        passed += reprojection_errors(est, src[good], dst[good]).max() <= 0.5
        if seed <= 5:
            again, flags2 = ransac_homography(matches, src, dst, iters=2000,
                                              inlier_eps=3.0, seed=seed)
            deterministic &= again.h.tobytes() == est.h.tobytes() and \
                np.array_equal(flags, flags2)
    elapsed = time.perf_counter() - start
    ok = passed >= 95 and deterministic and elapsed < 10.0
    assert report("C6 RANSAC 200 matches / 30% outliers, inliers within 0.5 px", ok,
                  f"{passed}/100 seeds, deterministic={deterministic}, runtime={elapsed:.2f}s")


def test_c7_count_correct(report):
    rng = np.random.default_rng(7)
    H = random_homography(rng)
    n = 400
    src = rng.uniform(50, 600, (n, 2))
    dst = apply(H, src)
    planted_ok = rng.random(n) < 0.4
    # correct: within 2 px; incorrect: displaced 5..50 px
    r = np.where(planted_ok, rng.uniform(0, 2.0, n), rng.uniform(5, 50, n))
    th = rng.uniform(0, 2 * np.pi, n)
    dst = dst + np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    matches = [MatchCandidate(i, i, 0) for i in range(n)]
    recount = sum(
        np.hypot(*(apply(H, src[i]) - dst[i])) <= 3.0 for i in range(n))
    got = count_correct(matches, src, dst, H, eps=3.0)
    ok = got == int(planted_ok.sum()) == recount
    assert report("C7 count_correct == planted correct count", ok,
                  f"CM={got}, planted={int(planted_ok.sum())}, recount={recount}")


def test_c8_timing(report):
    rng = np.random.default_rng(8)
    A = random_descriptors(1000, rng)
    B = random_descriptors(1000, rng)
    cfg = FuzzyMatcherConfig()
    match_fuzzy(A[:10], B, cfg)
    runs = 3
    start = time.perf_counter_ns()
    for _ in range(runs):
        match_fuzzy(A, B, cfg, workers=1)
    per_pair_ms = (time.perf_counter_ns() - start) / (runs * len(A) * len(B)) / 1e6
    assert report("C8 fuzzy decision cost < 0.01 ms per pairwise comparison",
                  per_pair_ms < 0.01,
                  f"{per_pair_ms:.6f} ms over {runs * len(A) * len(B):.0e} comparisons "
                  f"(reference figure 0.003731 ms)")


@needs_dataset
def test_c9_ratio_claim(report):
    # optional: reported, never fails the build
    recs = evaluate(DATASET, ransac_iters=0)
    by_pair = {}
    for r in recs:
        by_pair.setdefault((r.dataset, r.pair), {})[r.mode] = r
    wins = sum(m["fuzzy"].ratio > m["t15"].ratio for m in by_pair.values())
    report("C9 (optional) fuzzy CM/M > t15 CM/M on most pairs", wins > len(by_pair) / 2,
           f"{wins}/{len(by_pair)} pairs")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
