"""FAST-9 keypoints, BRIEF-style 256-bit descriptors and Hamming quantities.

Descriptor sets are ``(n, 32)`` uint8 arrays. Bit ``i`` of byte ``j`` holds
test ``8 * j + i`` (little-endian bit order within each byte), so a single
descriptor is a ``(32,)`` uint8 row.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .imageio import GrayImage
from .rng import DEFAULT_SEED, Xorshift64

__all__ = [
    "DESCRIPTOR_BITS",
    "DESCRIPTOR_BYTES",
    "BORDER_MARGIN",
    "Keypoint",
    "SamplingPattern",
    "DescriptorFileError",
    "detect_fast",
    "fast_scores",
    "make_pattern",
    "describe",
    "describe_all",
    "hamming_bits",
    "hamming_matrix",
    "agreement_ratio",
    "bit_counts",
    "write_descriptors",
    "read_descriptors",
]

DESCRIPTOR_BITS = 256
DESCRIPTOR_BYTES = DESCRIPTOR_BITS // 8
PATCH_RADIUS = 13
BORDER_MARGIN = 16
MIN_ARC = 9

# Bresenham circle of radius 3 as (dx, dy), clockwise from 12 o'clock
CIRCLE = (
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
)


class Keypoint(NamedTuple):
    x: int
    y: int
    score: int


@dataclass(frozen=True, eq=False)
class SamplingPattern:
    """256 intensity tests ``(ax, ay, bx, by)`` with offsets in [-13, 13]."""

    tests: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        tests = np.array(self.tests, dtype=np.int64)
        if tests.shape != (DESCRIPTOR_BITS, 4):
            raise ValueError(f"pattern must have shape (256, 4), got {tests.shape}")
        if np.abs(tests).max() > PATCH_RADIUS:
            raise ValueError("pattern offsets must lie in [-13, 13]")
        tests.setflags(write=False)
        object.__setattr__(self, "tests", tests)

    def __eq__(self, other):
        if not isinstance(other, SamplingPattern):
            return NotImplemented
        return np.array_equal(self.tests, other.tests)


class DescriptorFileError(ValueError):
    pass


def _check_margin(kp_x, kp_y, width, height):
    if not (BORDER_MARGIN <= kp_x < width - BORDER_MARGIN
            and BORDER_MARGIN <= kp_y < height - BORDER_MARGIN):
        raise ValueError(
            f"keypoint ({kp_x}, {kp_y}) violates the {BORDER_MARGIN}px border "
            f"margin of a {width}x{height} image")


def _longest_arc_score(mask: np.ndarray, absdiff: np.ndarray):
    """Longest circular run of ``mask`` per row and the |diff| sum over it."""
    n = mask.shape[0]
    m2 = np.concatenate([mask, mask], axis=1)
    d2 = np.concatenate([absdiff, absdiff], axis=1)
    run = np.zeros(n, dtype=np.int64)
    best = np.zeros(n, dtype=np.int64)
    best_end = np.zeros(n, dtype=np.int64)
    for j in range(m2.shape[1]):
        run = np.where(m2[:, j], run + 1, 0)
        better = run > best
        best = np.where(better, run, best)
        best_end = np.where(better, j, best_end)
    length = np.minimum(best, len(CIRCLE))
    csum = np.zeros((n, m2.shape[1] + 1), dtype=np.int64)
    np.cumsum(d2, axis=1, out=csum[:, 1:])
    rows = np.arange(n)
    score = csum[rows, best_end + 1] - csum[rows, best_end + 1 - length]
    return length, score


def fast_scores(img: GrayImage, threshold: int) -> np.ndarray:
    """FAST-9 corner response for every pixel (0 where not a corner).

    Pixels closer than 3 px to the border are never corners.
    """
    data = img.data.astype(np.int32)
    h, w = data.shape
    scores = np.zeros((h, w), dtype=np.int64)
    if h < 7 or w < 7:
        return scores
    center = data[3:h - 3, 3:w - 3]
    diff = np.stack([data[3 + dy:h - 3 + dy, 3 + dx:w - 3 + dx] - center
                     for dx, dy in CIRCLE], axis=-1)
    bright = diff > threshold
    dark = diff < -threshold
    cand = (bright.sum(axis=-1) >= MIN_ARC) | (dark.sum(axis=-1) >= MIN_ARC)
    ys, xs = np.nonzero(cand)
    if ys.size == 0:
        return scores
    d = diff[ys, xs]
    absd = np.abs(d)
    blen, bscore = _longest_arc_score(d > threshold, absd)
    dlen, dscore = _longest_arc_score(d < -threshold, absd)
    # at most one of the two arcs can reach 9 of 16 pixels
    score = np.where(blen >= MIN_ARC, bscore, np.where(dlen >= MIN_ARC, dscore, 0))
    scores[ys + 3, xs + 3] = score
    return scores


def _nonmax_suppress(scores: np.ndarray) -> np.ndarray:
    """3x3 suppression; among equal scores the smaller (y, x) survives."""
    h, w = scores.shape
    padded = np.pad(scores, 1)
    keep = scores > 0
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            nb = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
            earlier = dy < 0 or (dy == 0 and dx < 0)
            keep &= (scores > nb) if earlier else (scores >= nb)
    return keep


def detect_fast(img: GrayImage, threshold: int = 20,
                max_keypoints: int = 2000) -> list[Keypoint]:
    """Detect FAST-9 corners.

    A pixel is a corner when at least 9 contiguous pixels of the radius-3
    circle are all brighter than ``I(p) + threshold`` or all darker than
    ``I(p) - threshold``. Its score is the sum of ``|I(q) - I(p)|`` over that
    arc. After 3x3 non-maximum suppression, corners inside the 16 px border
    margin are dropped and the rest are returned by descending score (ties by
    ``(y, x)``), at most ``max_keypoints`` of them.
    """
    if img.width < 2 * BORDER_MARGIN + 1 or img.height < 2 * BORDER_MARGIN + 1:
        raise ValueError(
            f"image too small for detection: {img.width}x{img.height} (< 33x33)")
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    if max_keypoints < 0:
        raise ValueError("max_keypoints must be >= 0")

    scores = fast_scores(img, threshold)
    keep = _nonmax_suppress(scores)
    m = BORDER_MARGIN
    keep[:m, :] = False
    keep[-m:, :] = False
    keep[:, :m] = False
    keep[:, -m:] = False
    ys, xs = np.nonzero(keep)
    s = scores[ys, xs]
    order = np.lexsort((xs, ys, -s))[:max_keypoints]
    return [Keypoint(int(xs[i]), int(ys[i]), int(s[i])) for i in order]


def make_pattern(seed: int = DEFAULT_SEED) -> SamplingPattern:
    """Draw the 256 test pairs from xorshift64.

    Coordinates are consumed in the order ax, ay, bx, by per test, each as
    ``next() % 27 - 13``.
    """
    if seed == 0:
        raise ValueError("pattern seed must be non-zero")
    gen = Xorshift64(seed)
    span = 2 * PATCH_RADIUS + 1
    vals = [gen.below(span) - PATCH_RADIUS for _ in range(4 * DESCRIPTOR_BITS)]
    return SamplingPattern(np.array(vals).reshape(DESCRIPTOR_BITS, 4), seed=seed)


def describe_all(img: GrayImage, keypoints: Sequence[Keypoint],
                 pattern: SamplingPattern) -> np.ndarray:
    """Descriptors for many keypoints on a smoothed image, as ``(n, 32)`` uint8."""
    if len(keypoints) == 0:
        return np.zeros((0, DESCRIPTOR_BYTES), dtype=np.uint8)
    kx = np.array([kp[0] for kp in keypoints], dtype=np.int64)
    ky = np.array([kp[1] for kp in keypoints], dtype=np.int64)
    for x, y in zip(kx, ky):
        _check_margin(x, y, img.width, img.height)
    t = pattern.tests
    data = img.data
    ia = data[ky[:, None] + t[None, :, 1], kx[:, None] + t[None, :, 0]]
    ib = data[ky[:, None] + t[None, :, 3], kx[:, None] + t[None, :, 2]]
    return np.packbits(ia < ib, axis=1, bitorder="little")


def describe(img: GrayImage, kp: Keypoint, pattern: SamplingPattern) -> np.ndarray:
    """256-bit descriptor of one keypoint: bit i is ``I(kp + a_i) < I(kp + b_i)``."""
    return describe_all(img, [kp], pattern)[0]


def _words(desc) -> np.ndarray:
    arr = np.ascontiguousarray(desc, dtype=np.uint8)
    if arr.shape[-1] != DESCRIPTOR_BYTES:
        raise ValueError(f"descriptors must be {DESCRIPTOR_BYTES} bytes wide")
    return arr.view(np.uint64)


def hamming_bits(a, b):
    """Number of differing bit positions (XOR + popcount over 64-bit words).

    ``a`` and ``b`` may also be equal-shape ``(n, 32)`` stacks, giving ``n``
    row-wise distances.
    """
    counts = np.bitwise_count(_words(a) ^ _words(b)).sum(axis=-1, dtype=np.int64)
    return int(counts) if counts.ndim == 0 else counts


def hamming_matrix(A, B) -> np.ndarray:
    """All pairwise Hamming distances between two descriptor sets, ``(len(A), len(B))``."""
    wa = _words(np.atleast_2d(A))
    wb = _words(np.atleast_2d(B))
    out = np.zeros((wa.shape[0], wb.shape[0]), dtype=np.int32)
    for k in range(wa.shape[1]):
        out += np.bitwise_count(wa[:, k, None] ^ wb[None, :, k])
    return out


def bit_counts(a, b) -> tuple[int, int, int, int]:
    """Return ``(f00, f01, f10, f11)`` for a descriptor pair."""
    ua = np.unpackbits(np.asarray(a, dtype=np.uint8), bitorder="little").astype(bool)
    ub = np.unpackbits(np.asarray(b, dtype=np.uint8), bitorder="little").astype(bool)
    return (int(np.sum(~ua & ~ub)), int(np.sum(~ua & ub)),
            int(np.sum(ua & ~ub)), int(np.sum(ua & ub)))


def agreement_ratio(a, b) -> float:
    """Fraction of agreeing positions, ``(f11 + f00) / 256``.

    The result is a multiple of 1/256 and therefore exact in binary floating
    point.
    """
    return (DESCRIPTOR_BITS - hamming_bits(a, b)) / DESCRIPTOR_BITS


_MAGIC = b"BD01"
_HEADER = struct.Struct("<4sI")
_RECORD = np.dtype([("x", "<i4"), ("y", "<i4"), ("score", "<u4"),
                    ("desc", "u1", (DESCRIPTOR_BYTES,))])


def write_descriptors(path, keypoints: Sequence[Keypoint], descriptors) -> None:
    """Write keypoints and descriptors in the ``BD01`` binary format.

    Layout: magic ``BD01``, u32 LE count, then per record i32 x, i32 y,
    u32 score and the 32 descriptor bytes.
    """
    desc = np.asarray(descriptors, dtype=np.uint8).reshape(-1, DESCRIPTOR_BYTES)
    if len(keypoints) != desc.shape[0]:
        raise ValueError(
            f"{len(keypoints)} keypoints but {desc.shape[0]} descriptors")
    rec = np.zeros(len(keypoints), dtype=_RECORD)
    if len(keypoints):
        rec["x"] = [kp[0] for kp in keypoints]
        rec["y"] = [kp[1] for kp in keypoints]
        rec["score"] = [kp[2] for kp in keypoints]
        rec["desc"] = desc
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, len(keypoints)))
        fh.write(rec.tobytes())


def read_descriptors(path) -> tuple[list[Keypoint], np.ndarray]:
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _HEADER.size:
        raise DescriptorFileError(f"{path}: truncated header")
    magic, count = _HEADER.unpack_from(buf)
    if magic != _MAGIC:
        raise DescriptorFileError(f"{path}: bad magic {magic!r}")
    body = len(buf) - _HEADER.size
    expected = count * _RECORD.itemsize
    if body < expected:
        raise DescriptorFileError(
            f"{path}: truncated, header says {count} records but only "
            f"{body // _RECORD.itemsize} present")
    if body > expected:
        raise DescriptorFileError(
            f"{path}: count mismatch, {body - expected} trailing bytes")
    rec = np.frombuffer(buf, dtype=_RECORD, count=count, offset=_HEADER.size)
    kps = [Keypoint(int(x), int(y), int(s))
           for x, y, s in zip(rec["x"], rec["y"], rec["score"])]
    return kps, np.array(rec["desc"], dtype=np.uint8).reshape(count, DESCRIPTOR_BYTES)
