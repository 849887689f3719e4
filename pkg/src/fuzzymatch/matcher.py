"""Brute-force nearest-neighbour matching with crisp or fuzzy acceptance.

Every descriptor of set A is compared with every descriptor of set B; its
nearest neighbour (smallest Hamming distance, lowest index on ties) is the
single candidate for that A feature. The candidate is kept when

* constant mode: ``distance < t``
* fuzzy mode:    ``fuzzy_decide(cfg, distance)`` accepts it.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .features import DESCRIPTOR_BITS, hamming_matrix
from .fuzzy import FuzzyMatcherConfig, fuzzy_decide

__all__ = [
    "MatchCandidate",
    "nearest_neighbor",
    "nearest_neighbors",
    "match_constant",
    "match_fuzzy",
]

_CHUNK = 512


@dataclass(frozen=True)
class MatchCandidate:
    index_a: int
    index_b: int
    distance_bits: int
    degree: Optional[float] = None


def _as_set(descs, name):
    arr = np.asarray(descs, dtype=np.uint8)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be an (n, 32) descriptor array")
    return arr


def nearest_neighbor(a, B) -> tuple[int, int]:
    """Index in ``B`` of the descriptor closest to ``a`` and its distance."""
    B = _as_set(B, "B")
    if B.shape[0] == 0:
        raise ValueError("descriptor set B is empty")
    dist = hamming_matrix(np.asarray(a, dtype=np.uint8).reshape(1, -1), B)[0]
    j = int(np.argmin(dist))
    return j, int(dist[j])


def nearest_neighbors(A, B, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Nearest neighbour in ``B`` for every row of ``A``.

    Returns ``(index_b, distance)`` arrays of length ``len(A)``. With
    ``workers > 1`` row blocks of A are processed on a thread pool; the
    result does not depend on the schedule.
    """
    A = _as_set(A, "A")
    B = _as_set(B, "B")
    if B.shape[0] == 0:
        raise ValueError("descriptor set B is empty")
    n = A.shape[0]
    idx = np.zeros(n, dtype=np.int64)
    dist = np.zeros(n, dtype=np.int64)

    def block(start):
        d = hamming_matrix(A[start:start + _CHUNK], B)
        j = np.argmin(d, axis=1)
        idx[start:start + _CHUNK] = j
        dist[start:start + _CHUNK] = d[np.arange(d.shape[0]), j]

    starts = range(0, n, _CHUNK)
    if workers > 1 and n > _CHUNK:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(block, starts))
    else:
        for s in starts:
            block(s)
    return idx, dist


def match_constant(A, B, t: float, workers: int = 1) -> list[MatchCandidate]:
    """Nearest-neighbour matches whose distance is strictly below ``t`` bits."""
    if not 0 <= t <= DESCRIPTOR_BITS:
        raise ValueError(f"threshold must lie in [0, {DESCRIPTOR_BITS}], got {t}")
    idx, dist = nearest_neighbors(A, B, workers)
    keep = np.flatnonzero(dist < t)
    return [MatchCandidate(int(i), int(idx[i]), int(dist[i])) for i in keep]


def match_fuzzy(A, B, cfg: FuzzyMatcherConfig | None = None,
                workers: int = 1) -> list[MatchCandidate]:
    """Nearest-neighbour matches accepted by the fuzzy decision, with degrees."""
    cfg = cfg or FuzzyMatcherConfig()
    idx, dist = nearest_neighbors(A, B, workers)
    accept, degree = fuzzy_decide(cfg, dist)
    keep = np.flatnonzero(accept)
    return [MatchCandidate(int(i), int(idx[i]), int(dist[i]), float(degree[i]))
            for i in keep]

