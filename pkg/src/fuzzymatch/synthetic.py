"""Seeded synthetic scenes, homographies and descriptor sets.

Used by the demos and the test-suite when the Oxford affine sequences are
not available locally.
"""
from __future__ import annotations

import os

import numpy as np
from scipy import ndimage

from .features import DESCRIPTOR_BITS, DESCRIPTOR_BYTES
from .geometry import Homography, dlt, write_homography
from .imageio import GrayImage, save_image


def textured_image(width: int = 320, height: int = 240, seed: int = 0,
                   n_rects: int = 60) -> GrayImage:
    """Blurred noise overlaid with random flat rectangles (plenty of corners)."""
    rng = np.random.default_rng(seed)
    base = ndimage.gaussian_filter(rng.normal(size=(height, width)), 4.0)
    base = (base - base.min()) / (np.ptp(base) + 1e-12) * 120 + 60
    for _ in range(n_rects):
        w, h = rng.integers(6, max(7, width // 6)), rng.integers(6, max(7, height // 6))
        x, y = rng.integers(0, width - w), rng.integers(0, height - h)
        base[y:y + h, x:x + w] = rng.integers(0, 256)
    return GrayImage.from_array(np.clip(np.rint(base), 0, 255).astype(np.uint8))


def random_homography(width: int, height: int, rng, jitter: float = 0.08) -> Homography:
    """Homography moving the image corners by up to ``jitter`` of the image size."""
    corners = np.array([[0, 0], [width, 0], [width, height], [0, height]], float)
    moved = corners + rng.uniform(-jitter, jitter, size=(4, 2)) * [width, height]
    return dlt(corners, moved)


def warp_image(img: GrayImage, H: Homography, fill: int = 0) -> GrayImage:
    """Resample ``img`` so that ``out(H(p)) = img(p)`` (bilinear, same size)."""
    h, w = img.shape
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    pts = np.stack([xs.ravel(), ys.ravel(), np.ones(xs.size)])
    src = np.linalg.inv(H.h) @ pts
    sx, sy = src[0] / src[2], src[1] / src[2]
    out = ndimage.map_coordinates(img.data.astype(np.float64), [sy, sx], order=1,
                                  mode="constant", cval=fill)
    return GrayImage.from_array(np.clip(np.rint(out), 0, 255).astype(np.uint8).reshape(h, w))


def random_descriptors(n: int, rng) -> np.ndarray:
    return rng.integers(0, 256, size=(n, DESCRIPTOR_BYTES), dtype=np.uint8)


def flip_bits(desc: np.ndarray, k: int, rng) -> np.ndarray:
    """Copy of one descriptor with exactly ``k`` distinct bits inverted."""
    bits = np.unpackbits(np.asarray(desc, dtype=np.uint8), bitorder="little")
    pos = rng.choice(DESCRIPTOR_BITS, size=k, replace=False)
    bits[pos] ^= 1
    return np.packbits(bits, bitorder="little")


def planted_sets(n_a: int, n_b: int, distances, rng):
    """Descriptor sets where ``A[i]`` has a planted partner in ``B``.

    ``A[i]`` is ``B[i]`` with ``distances[i]`` bits flipped. The remaining
    rows are uniform random, so for small planted distances the partner is
    almost surely the nearest neighbour. Returns ``(A, B)``.
    """
    distances = list(distances)
    B = random_descriptors(n_b, rng)
    A = random_descriptors(n_a, rng)
    for i, k in enumerate(distances):
        A[i] = flip_bits(B[i], k, rng)
    return A, B


def write_dataset(directory, seed: int = 0, n_targets: int = 5, width: int = 320,
                  height: int = 240, jitter: float = 0.06, noise: float = 0.0) -> None:
    """Write ``img1..img{n+1}.pgm`` and ``H1to{k}p`` files into ``directory``.

    Target ``k`` is the reference warped by an increasingly strong random
    homography, plus Gaussian pixel noise of standard deviation ``noise``.
    """
    os.makedirs(directory, exist_ok=True)
    rng = np.random.default_rng(seed)
    ref = textured_image(width, height, seed)
    save_image(ref, os.path.join(directory, "img1.pgm"))
    for k in range(2, n_targets + 2):
        H = random_homography(width, height, rng, jitter * (k - 1) / n_targets + 0.01)
        target = warp_image(ref, H)
        if noise > 0:
            noisy = target.data + rng.normal(0, noise, size=target.data.shape)
            target = GrayImage.from_array(np.clip(np.rint(noisy), 0, 255).astype(np.uint8))
        save_image(target, os.path.join(directory, f"img{k}.pgm"))
        write_homography(H, os.path.join(directory, f"H1to{k}p"))
