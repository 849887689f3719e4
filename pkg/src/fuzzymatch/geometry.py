"""Planar homographies: normalized DLT, seeded RANSAC and ground-truth checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .rng import DEFAULT_SEED, Xorshift64

__all__ = [
    "Homography",
    "DegenerateConfigurationError",
    "PointAtInfinityError",
    "apply",
    "dlt",
    "ransac_homography",
    "count_correct",
    "correct_mask",
    "match_points",
    "reprojection_errors",
    "read_homography",
    "write_homography",
]

DET_FLOOR = 1e-12
W_FLOOR = 1e-12
# smallest / second-smallest singular value above this => null space not unique
DEGENERACY_RATIO = 0.99
RANK_TOL = 1e-10
_BLOCK = 256


class DegenerateConfigurationError(ValueError):
    pass


class PointAtInfinityError(ValueError):
    pass


def _normalize_batch(h: np.ndarray) -> np.ndarray:
    fro = np.linalg.norm(h, axis=(-2, -1), keepdims=True)
    h22 = h[..., 2:3, 2:3]
    use_h22 = np.abs(h22) > 1e-12 * fro
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(use_h22, h / h22, h / fro)


@dataclass(frozen=True, eq=False)
class Homography:
    """3x3 projective transform.

    Stored normalized: divided by the bottom-right entry when that entry is
    nonzero, otherwise scaled to unit Frobenius norm. Construction rejects
    matrices whose normalized determinant is below ``det_floor`` in
    magnitude.
    """

    h: np.ndarray
    det_floor: float = field(default=DET_FLOOR, repr=False)

    def __post_init__(self):
        m = np.array(self.h, dtype=np.float64)
        if m.shape != (3, 3) or not np.all(np.isfinite(m)):
            raise ValueError("homography must be a finite 3x3 matrix")
        if not np.any(m):
            raise DegenerateConfigurationError("zero matrix is not a homography")
        m = _normalize_batch(m)
        if abs(np.linalg.det(m)) < self.det_floor:
            raise DegenerateConfigurationError(
                f"homography is not invertible (|det| < {self.det_floor:g})")
        m.setflags(write=False)
        object.__setattr__(self, "h", m)

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.h), det_floor=self.det_floor)

    def __matmul__(self, other: "Homography") -> "Homography":
        return Homography(self.h @ other.h)

    def __call__(self, p):
        return apply(self, p)

    def allclose(self, other: "Homography", atol: float = 1e-8) -> bool:
        return bool(np.max(np.abs(self.h - other.h)) <= atol)

    def __repr__(self):
        rows = "; ".join(" ".join(f"{v:.6g}" for v in r) for r in self.h)
        return f"Homography([{rows}])"


def _as_matrix(H) -> np.ndarray:
    return H.h if isinstance(H, Homography) else np.asarray(H, dtype=np.float64)


def _project(h: np.ndarray, pts: np.ndarray):
    """Project ``(..., n, 2)`` points with ``(..., 3, 3)`` matrices; returns (xy, w)."""
    x = pts[..., 0]
    y = pts[..., 1]
    hh = h[..., None, :, :]
    u = hh[..., 0, 0] * x + hh[..., 0, 1] * y + hh[..., 0, 2]
    v = hh[..., 1, 0] * x + hh[..., 1, 1] * y + hh[..., 1, 2]
    w = hh[..., 2, 0] * x + hh[..., 2, 1] * y + hh[..., 2, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        xy = np.stack([u / w, v / w], axis=-1)
    return xy, w


def apply(H, p) -> np.ndarray:
    """Map a point ``(2,)`` or points ``(n, 2)`` through ``H``.

    Raises :class:`PointAtInfinityError` when ``|w| < 1e-12``.
    """
    pts = np.asarray(p, dtype=np.float64)
    single = pts.ndim == 1
    xy, w = _project(_as_matrix(H), pts.reshape(-1, 2))
    if np.any(np.abs(w) < W_FLOOR):
        raise PointAtInfinityError("point maps to infinity")
    return xy[0] if single else xy


def reprojection_errors(H, src, dst) -> np.ndarray:
    """``||H(src) - dst||`` per point; ``inf`` where the projection is at infinity."""
    xy, w = _project(_as_matrix(H), np.asarray(src, dtype=np.float64))
    err = np.linalg.norm(xy - np.asarray(dst, dtype=np.float64), axis=-1)
    return np.where(np.abs(w) < W_FLOOR, np.inf, err)


def _hartley(pts: np.ndarray):
    """Similarity per point set moving the centroid to 0 and mean radius to sqrt(2)."""
    c = pts.mean(axis=-2, keepdims=True)
    r = np.linalg.norm(pts - c, axis=-1).mean(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.sqrt(2.0) / r
    T = np.zeros(pts.shape[:-2] + (3, 3))
    T[..., 0, 0] = s
    T[..., 1, 1] = s
    T[..., 0, 2] = -s * c[..., 0, 0]
    T[..., 1, 2] = -s * c[..., 0, 1]
    T[..., 2, 2] = 1.0
    ok = r > 0
    T = np.where(ok[..., None, None], T, np.eye(3))
    with np.errstate(invalid="ignore"):
        normed = np.where(ok[..., None, None], (pts - c) * s[..., None, None], 0.0)
    return T, normed, ok


def _dlt_core(src: np.ndarray, dst: np.ndarray):
    """Batched normalized DLT on ``(k, n, 2)`` correspondences.

    Returns ``(H, ok)`` with ``H`` of shape ``(k, 3, 3)`` (normalized) and a
    boolean mask of non-degenerate solutions.
    """
    k, n = src.shape[:2]
    T1, s, ok1 = _hartley(src)
    T2, d, ok2 = _hartley(dst)
    x, y = s[..., 0], s[..., 1]
    u, v = d[..., 0], d[..., 1]
    zero = np.zeros_like(x)
    one = np.ones_like(x)
    rows_u = np.stack([-x, -y, -one, zero, zero, zero, u * x, u * y, u], axis=-1)
    rows_v = np.stack([zero, zero, zero, -x, -y, -one, v * x, v * y, v], axis=-1)
    # a zero row pads the minimal 8x9 system to square: same null space, 9 singular values
    pad = [np.zeros((k, 1, 9))] if n == 4 else []
    A = np.concatenate([rows_u, rows_v] + pad, axis=1)
    A = np.where((ok1 & ok2)[:, None, None], A, 0.0)
    _, sv, vt = np.linalg.svd(A, full_matrices=True)
    smallest, second, largest = sv[:, -1], sv[:, -2], sv[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        well_posed = (second > RANK_TOL * largest) & (smallest / second <= DEGENERACY_RATIO)
    hn = vt[:, -1, :].reshape(k, 3, 3)
    H = np.linalg.solve(T2, hn @ T1) if k else hn
    H = _normalize_batch(H)
    finite = np.all(np.isfinite(H), axis=(1, 2))
    det = np.where(finite, np.linalg.det(np.where(finite[:, None, None], H, np.eye(3))), 0.0)
    ok = ok1 & ok2 & well_posed & finite & (np.abs(det) >= DET_FLOOR)
    return H, ok


def dlt(src, dst) -> Homography:
    """Estimate ``H`` with ``H(src) ~ dst`` from at least four correspondences.

    Both point sets are Hartley-normalized before solving the 2n x 9 system
    by SVD. Raises :class:`DegenerateConfigurationError` when the null space
    is not one-dimensional (e.g. collinear points) or the result is singular.
    """
    src = np.asarray(src, dtype=np.float64).reshape(-1, 2)
    dst = np.asarray(dst, dtype=np.float64).reshape(-1, 2)
    if src.shape != dst.shape:
        raise ValueError("src and dst must have the same number of points")
    if src.shape[0] < 4:
        raise ValueError(f"dlt needs at least 4 correspondences, got {src.shape[0]}")
    H, ok = _dlt_core(src[None], dst[None])
    if not ok[0]:
        raise DegenerateConfigurationError("degenerate point configuration")
    return Homography(H[0])


def _keypoint_xy(kps) -> np.ndarray:
    if isinstance(kps, np.ndarray):
        return np.asarray(kps[:, :2], dtype=np.float64)
    return np.array([(kp[0], kp[1]) for kp in kps], dtype=np.float64).reshape(-1, 2)


def match_points(matches, kps_a, kps_b) -> tuple[np.ndarray, np.ndarray]:
    """Pixel coordinates ``(src, dst)`` of each match, shape ``(m, 2)`` each."""
    pa = _keypoint_xy(kps_a)
    pb = _keypoint_xy(kps_b)
    ia = np.array([m.index_a for m in matches], dtype=np.int64)
    ib = np.array([m.index_b for m in matches], dtype=np.int64)
    return pa[ia].reshape(-1, 2), pb[ib].reshape(-1, 2)


def _count_within(h: np.ndarray, src: np.ndarray, dst: np.ndarray, eps: float) -> np.ndarray:
    """Per model in ``(k, 3, 3)``, how many points reproject within ``eps``."""
    x, y = src[:, 0], src[:, 1]
    hh = h[:, :, :, None]
    w = hh[:, 2, 0] * x + hh[:, 2, 1] * y + hh[:, 2, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        du = (hh[:, 0, 0] * x + hh[:, 0, 1] * y + hh[:, 0, 2]) / w - dst[:, 0]
        dv = (hh[:, 1, 0] * x + hh[:, 1, 1] * y + hh[:, 1, 2]) / w - dst[:, 1]
        inside = (du * du + dv * dv <= eps * eps) & (np.abs(w) >= W_FLOOR)
    return np.count_nonzero(inside, axis=1)


def _draw_samples(n: int, iters: int, seed: int) -> np.ndarray:
    gen = Xorshift64(seed)
    out = np.empty((iters, 4), dtype=np.int64)
    for it in range(iters):
        chosen: list[int] = []
        while len(chosen) < 4:
            j = gen.below(n)
            if j not in chosen:
                chosen.append(j)
        out[it] = chosen
    return out


def ransac_homography(matches: Sequence, kps_a, kps_b, iters: int = 2000,
                      inlier_eps: float = 3.0, seed: int = DEFAULT_SEED):
    """Robust homography from putative matches.

    Each of ``iters`` rounds draws 4 distinct matches with xorshift64 (rejecting
    repeats), fits :func:`dlt` and counts matches reprojecting within
    ``inlier_eps`` pixels. The first model with the largest consensus wins and
    is refit on its inliers.

    Returns:
        ``(Homography, inliers)`` where ``inliers`` is a boolean array over
        ``matches`` evaluated under the returned model.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if inlier_eps <= 0:
        raise ValueError("inlier_eps must be positive")
    src, dst = match_points(matches, kps_a, kps_b)
    n = src.shape[0]
    if n < 4:
        raise ValueError(f"RANSAC needs at least 4 matches, got {n}")

    samples = _draw_samples(n, iters, seed)
    counts = np.full(iters, -1, dtype=np.int64)
    models = np.empty((iters, 3, 3))
    for start in range(0, iters, _BLOCK):
        sl = slice(start, start + _BLOCK)
        idx = samples[sl]
        H, ok = _dlt_core(src[idx], dst[idx])
        models[sl] = H
        counts[sl] = np.where(ok, _count_within(H, src, dst, inlier_eps), -1)

    best = int(np.argmax(counts))
    if counts[best] < 4:
        raise DegenerateConfigurationError("no model with at least 4 inliers")
    model = Homography(models[best])
    inliers = reprojection_errors(model, src, dst) <= inlier_eps
    try:
        refit = dlt(src[inliers], dst[inliers])
    except DegenerateConfigurationError:
        refit = model
    return refit, reprojection_errors(refit, src, dst) <= inlier_eps


def correct_mask(matches, kps_a, kps_b, H_gt, eps: float = 3.0) -> np.ndarray:
    """Boolean mask of matches within ``eps`` pixels of the ground-truth mapping."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    src, dst = match_points(matches, kps_a, kps_b)
    return reprojection_errors(H_gt, src, dst) <= eps


def count_correct(matches, kps_a, kps_b, H_gt, eps: float = 3.0) -> int:
    """Number of matches confirmed by ``H_gt`` (the CM statistic)."""
    return int(np.count_nonzero(correct_mask(matches, kps_a, kps_b, H_gt, eps)))


def read_homography(path) -> Homography:
    """Read 9 whitespace-separated reals (row-major 3x3)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        vals = [float(t) for t in text.split()]
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric homography entry") from exc
    if len(vals) != 9:
        raise ValueError(f"{path}: expected 9 values, found {len(vals)}")
    try:
        return Homography(np.array(vals).reshape(3, 3))
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def write_homography(H, path) -> None:
    m = _as_matrix(H)
    with open(path, "w", encoding="utf-8") as fh:
        for row in m:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
