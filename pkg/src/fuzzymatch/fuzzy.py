"""Two-rule zero-order Sugeno system that decides match / no match from a
Hamming distance.

Rules::

    IF distance is LOW  THEN output = singleton_match
    IF distance is HIGH THEN output = singleton_nomatch

The crisp output is the firing-strength weighted mean of the two singletons
and a match is declared when it reaches ``cutoff``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TrapezoidMF",
    "FuzzyMatcherConfig",
    "DEFAULT_LOW",
    "DEFAULT_HIGH",
    "mf_eval",
    "sugeno_infer",
    "fuzzy_decide",
    "parse_config",
    "parse_mf",
    "format_config",
]

DISTANCE_MAX = 256


@dataclass(frozen=True)
class TrapezoidMF:
    """Trapezoid with feet ``a``, ``d`` and shoulders ``b``, ``c`` (in bits)."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (self.a <= self.b <= self.c <= self.d):
            raise ValueError(
                f"trapezoid breakpoints must satisfy a <= b <= c <= d, got "
                f"({self.a}, {self.b}, {self.c}, {self.d})")

    def __call__(self, x):
        return mf_eval(self, x)

    @property
    def params(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)


DEFAULT_LOW = TrapezoidMF(0, 0, 10, 15)
DEFAULT_HIGH = TrapezoidMF(10, 15, 256, 256)


def mf_eval(mf: TrapezoidMF, x):
    """Membership degree of ``x`` (scalar or array).

    On a vertical edge (``a == b`` or ``c == d``) the plateau value 1 wins.
    """
    xa = np.asarray(x, dtype=np.float64)
    a, b, c, d = mf.a, mf.b, mf.c, mf.d
    with np.errstate(divide="ignore", invalid="ignore"):
        rise = (xa - a) / (b - a) if b > a else np.zeros_like(xa)
        fall = (d - xa) / (d - c) if d > c else np.zeros_like(xa)
    out = np.where((xa >= b) & (xa <= c), 1.0,
                   np.where((xa > a) & (xa < b), rise,
                            np.where((xa > c) & (xa < d), fall, 0.0)))
    return float(out) if out.ndim == 0 else out


def _covers_domain(low: TrapezoidMF, high: TrapezoidMF) -> bool:
    # membership sets are unions of intervals bounded by breakpoints, so
    # probing every breakpoint and every gap midpoint is exhaustive
    pts = {0.0, float(DISTANCE_MAX)}
    for v in low.params + high.params:
        if 0 <= v <= DISTANCE_MAX:
            pts.add(float(v))
    pts = sorted(pts)
    probes = pts + [(p + q) / 2 for p, q in zip(pts, pts[1:])]
    probes = np.array(probes)
    return bool(np.all(mf_eval(low, probes) + mf_eval(high, probes) > 0))


@dataclass(frozen=True)
class FuzzyMatcherConfig:
    """Membership functions, output singletons and decision cutoff."""

    low: TrapezoidMF = field(default=DEFAULT_LOW)
    high: TrapezoidMF = field(default=DEFAULT_HIGH)
    singleton_match: float = 1.0
    singleton_nomatch: float = 0.0
    cutoff: float = 0.5

    def __post_init__(self):
        if not self.singleton_match > self.singleton_nomatch:
            raise ValueError("singleton_match must exceed singleton_nomatch")
        if not self.singleton_nomatch < self.cutoff < self.singleton_match:
            raise ValueError(
                f"cutoff {self.cutoff} must lie strictly between the singletons "
                f"({self.singleton_nomatch}, {self.singleton_match})")
        if not _covers_domain(self.low, self.high):
            raise ValueError(
                "LOW and HIGH leave part of [0, 256] with zero total membership")

    def scaled(self, factor: float) -> "FuzzyMatcherConfig":
        """Copy with both singletons and the cutoff multiplied by ``factor``."""
        if factor <= 0:
            raise ValueError("factor must be positive")
        return FuzzyMatcherConfig(self.low, self.high,
                                  self.singleton_match * factor,
                                  self.singleton_nomatch * factor,
                                  self.cutoff * factor)


def _check_distance(d):
    da = np.asarray(d, dtype=np.float64)
    if np.any(~np.isfinite(da)) or np.any(da < 0) or np.any(da > DISTANCE_MAX):
        raise ValueError(f"Hamming distance must lie in [0, {DISTANCE_MAX}]")
    return da


def sugeno_infer(cfg: FuzzyMatcherConfig, d):
    """Weighted-average output of the two rules for distance ``d``.

    Accepts a scalar or an array. Where neither rule fires the output is
    ``singleton_nomatch``.
    """
    da = _check_distance(d)
    w_low = np.asarray(mf_eval(cfg.low, da))
    w_high = np.asarray(mf_eval(cfg.high, da))
    total = w_low + w_high
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (w_low * cfg.singleton_match + w_high * cfg.singleton_nomatch) / total
    out = np.where(total > 0, out, cfg.singleton_nomatch)
    return float(out) if out.ndim == 0 else out


def fuzzy_decide(cfg: FuzzyMatcherConfig, d):
    """Return ``(is_match, degree)``; a match needs ``degree >= cutoff``."""
    degree = sugeno_infer(cfg, d)
    is_match = np.asarray(degree) >= cfg.cutoff
    if is_match.ndim == 0:
        return bool(is_match), degree
    return is_match, degree


def parse_mf(text: str) -> TrapezoidMF:
    """Parse ``"a,b,c,d"``."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"expected four comma-separated breakpoints, got {text!r}")
    try:
        return TrapezoidMF(*(float(p) for p in parts))
    except ValueError as exc:
        raise ValueError(f"bad membership function {text!r}: {exc}") from exc


def parse_config(line: str) -> FuzzyMatcherConfig:
    """Parse a ``low=a,b,c,d high=a,b,c,d cutoff=v`` line.

    Keys may appear in any order and may be omitted (defaults apply).
    """
    kwargs = {}
    for item in line.split():
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"malformed config item {item!r}")
        if key in ("low", "high"):
            kwargs[key] = parse_mf(value)
        elif key == "cutoff":
            kwargs["cutoff"] = float(value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    return FuzzyMatcherConfig(**kwargs)


def _num(v) -> str:
    return repr(float(v)).removesuffix(".0")


def format_config(cfg: FuzzyMatcherConfig) -> str:
    """Inverse of :func:`parse_config` (singletons are not part of the line)."""
    low = ",".join(_num(v) for v in cfg.low.params)
    high = ",".join(_num(v) for v in cfg.high.params)
    return f"low={low} high={high} cutoff={_num(cfg.cutoff)}"
