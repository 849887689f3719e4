"""Netpbm (P2/P3/P5/P6) reading and writing, plus the 5x5 box pre-smoothing.

Images are held as :class:`GrayImage`, an immutable 8-bit grayscale raster
backed by a read-only ``(height, width)`` uint8 array.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GrayImage",
    "ImageFormatError",
    "load_image",
    "save_image",
    "box_smooth",
    "rgb_to_gray",
]

# integer luma weights, sum to 256
LUMA_R, LUMA_G, LUMA_B = 77, 150, 29

SMOOTH_RADIUS = 2


class ImageFormatError(ValueError):
    """Raised for malformed or unsupported Netpbm input."""


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Row-major 8-bit grayscale image.

    ``data`` is stored as a read-only ``(height, width)`` uint8 array;
    ``data.ravel()`` is the row-major pixel sequence.
    """

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"zero image dimension: {self.width}x{self.height}")
        arr = np.asarray(self.data)
        if arr.size != self.width * self.height:
            raise ValueError(
                f"pixel count {arr.size} != {self.width}x{self.height}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("intensities must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.array(arr.reshape(self.height, self.width), dtype=np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, array) -> "GrayImage":
        arr = np.asarray(array)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(arr.shape[1], arr.shape[0], arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and np.array_equal(self.data, other.data))

    def __repr__(self):
        return f"GrayImage(width={self.width}, height={self.height})"


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Integer luma ``(77 R + 150 G + 29 B) >> 8`` on an ``(..., 3)`` array."""
    rgb = np.asarray(rgb, dtype=np.uint32)
    gray = (LUMA_R * rgb[..., 0] + LUMA_G * rgb[..., 1] + LUMA_B * rgb[..., 2]) >> 8
    return gray.astype(np.uint8)


_WHITESPACE = b" \t\n\r\v\f"


class _HeaderReader:
    def __init__(self, buf: bytes, path):
        self.buf = buf
        self.pos = 2
        self.path = path

    def token(self) -> int:
        buf, n = self.buf, len(self.buf)
        while self.pos < n:
            ch = buf[self.pos:self.pos + 1]
            if ch == b"#":
                end = buf.find(b"\n", self.pos)
                self.pos = n if end < 0 else end + 1
            elif ch in _WHITESPACE:
                self.pos += 1
            else:
                break
        start = self.pos
        while self.pos < n and buf[self.pos:self.pos + 1] not in _WHITESPACE \
                and buf[self.pos:self.pos + 1] != b"#":
            self.pos += 1
        if start == self.pos:
            raise ImageFormatError(f"{self.path}: truncated header")
        tok = buf[start:self.pos]
        if not tok.isdigit():
            raise ImageFormatError(f"{self.path}: bad header token {tok!r}")
        return int(tok)


def load_image(path) -> GrayImage:
    """Read a P2, P3, P5 or P6 file as a :class:`GrayImage`.

    Color inputs are reduced with :func:`rgb_to_gray`. Samples are not
    rescaled when ``maxval < 255``.
    """
    with open(path, "rb") as fh:
        buf = fh.read()
    magic = buf[:2]
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise ImageFormatError(f"{path}: unknown magic number {magic!r}")
    hdr = _HeaderReader(buf, path)
    width, height, maxval = hdr.token(), hdr.token(), hdr.token()
    if width == 0 or height == 0:
        raise ImageFormatError(f"{path}: zero dimension {width}x{height}")
    if maxval == 0 or maxval > 255:
        raise ImageFormatError(f"{path}: unsupported maxval {maxval}")
    channels = 3 if magic in (b"P3", b"P6") else 1
    count = width * height * channels

    if magic in (b"P5", b"P6"):
        # exactly one whitespace byte separates header from raster
        if hdr.pos >= len(buf):
            raise ImageFormatError(f"{path}: truncated payload")
        start = hdr.pos + 1
        payload = buf[start:start + count]
        if len(payload) < count:
            raise ImageFormatError(
                f"{path}: truncated payload ({len(payload)} of {count} bytes)")
        samples = np.frombuffer(payload, dtype=np.uint8)
    else:
        toks = re.sub(rb"#[^\n]*", b" ", buf[hdr.pos:]).split()
        if len(toks) < count:
            raise ImageFormatError(
                f"{path}: truncated payload ({len(toks)} of {count} samples)")
        try:
            samples = np.array([int(t) for t in toks[:count]], dtype=np.int64)
        except ValueError as exc:
            raise ImageFormatError(f"{path}: bad sample value") from exc
    if samples.max(initial=0) > maxval:
        raise ImageFormatError(f"{path}: sample exceeds maxval {maxval}")

    if channels == 3:
        gray = rgb_to_gray(samples.reshape(height, width, 3))
    else:
        gray = samples.astype(np.uint8).reshape(height, width)
    return GrayImage(width, height, gray)


def save_image(img: GrayImage, path, binary: bool = True) -> None:
    """Write ``img`` as P5 (default) or P2."""
    if binary:
        header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(img.data.tobytes())
    else:
        lines = [f"P2\n{img.width} {img.height}\n255"]
        lines += [" ".join(str(v) for v in row) for row in img.data]
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def box_smooth(img: GrayImage) -> GrayImage:
    """5x5 box mean with clamp-to-edge borders.

    Each output pixel is ``sum(window) // 25``. The window sums come from a
    summed-area table over the edge-padded image.
    """
    if img.width < 5 or img.height < 5:
        raise ValueError(f"box_smooth needs at least 5x5, got {img.width}x{img.height}")
    r = SMOOTH_RADIUS
    k = 2 * r + 1
    padded = np.pad(img.data.astype(np.int64), r, mode="edge")
    sat = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64)
    np.cumsum(np.cumsum(padded, axis=0), axis=1, out=sat[1:, 1:])
    h, w = img.height, img.width
    sums = sat[k:k + h, k:k + w] - sat[:h, k:k + w] - sat[k:k + h, :w] + sat[:h, :w]
    return GrayImage(w, h, (sums // (k * k)).astype(np.uint8))
