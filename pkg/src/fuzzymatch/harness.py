"""Evaluation protocol: M / CM per matching mode over image sequences.

A dataset directory follows the Oxford affine layout::

    img1.ppm  img2.ppm ... img6.ppm      (.pgm also accepted)
    H1to2p    H1to3p   ... H1to6p        (9 reals, row-major)

For every pair (1, N) both images are detected and described once, then each
requested mode is run: ``tK`` is the constant threshold ``distance < K`` and
``fuzzy`` is the Sugeno decision. M is the number of matches, CM the number
within ``eps`` pixels of the ground-truth mapping.
"""
from __future__ import annotations

import csv
import logging
import os
import re
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .features import describe_all, detect_fast, make_pattern
from .fuzzy import FuzzyMatcherConfig
from .geometry import (DegenerateConfigurationError, Homography, count_correct,
                       ransac_homography, read_homography)
from .imageio import GrayImage, box_smooth, load_image
from .matcher import match_constant, match_fuzzy
from .rng import DEFAULT_SEED

__all__ = [
    "DEFAULT_MODES",
    "CSV_HEADER",
    "DatasetError",
    "DatasetPair",
    "EvaluationRecord",
    "ExtractionParams",
    "extract",
    "parse_modes",
    "find_datasets",
    "load_dataset",
    "run_pair",
    "evaluate",
    "emit_csv",
]

log = logging.getLogger(__name__)

DEFAULT_MODES = ("t5", "t10", "t15", "fuzzy")
CSV_HEADER = ("dataset", "pair", "mode", "M", "CM", "ns_per_decision")
IMAGE_EXTS = (".ppm", ".pgm")
_MODE_RE = re.compile(r"t(\d+)$")


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class ExtractionParams:
    threshold: int = 20
    max_keypoints: int = 2000
    pattern_seed: int = DEFAULT_SEED


@dataclass(frozen=True, eq=False)
class DatasetPair:
    name: str
    ref_index: int
    target_index: int
    ref_image: GrayImage
    target_image: GrayImage
    H_gt: Homography

    @property
    def pair(self) -> str:
        return f"{self.ref_index}-{self.target_index}"


@dataclass(frozen=True)
class EvaluationRecord:
    dataset: str
    pair: str
    mode: str
    M: int
    CM: int
    ns_per_decision: float
    # RANSAC consensus on the putative matches; not part of the CSV
    ransac_inliers: Optional[int] = field(default=None, compare=False)

    @property
    def ratio(self) -> float:
        return self.CM / self.M if self.M else 0.0


def parse_modes(modes) -> list[str]:
    """Validate a mode list (``"t5,t10,fuzzy"`` or an iterable)."""
    if isinstance(modes, str):
        modes = [m.strip() for m in modes.split(",") if m.strip()]
    modes = list(modes)
    if not modes:
        raise ValueError("at least one mode is required")
    for m in modes:
        if m != "fuzzy":
            match = _MODE_RE.match(m)
            if not match or int(match.group(1)) > 256:
                raise ValueError(f"unknown mode {m!r} (expected tK with K <= 256 or 'fuzzy')")
    return modes


def _mode_key(mode: str):
    if mode == "fuzzy":
        return (1, 0)
    return (0, int(mode[1:]))


def _find_image(directory, index):
    for ext in IMAGE_EXTS:
        path = os.path.join(directory, f"img{index}{ext}")
        if os.path.isfile(path):
            return path
    return None


def find_datasets(root) -> list[str]:
    """``[root]`` if it is itself a sequence, otherwise its sequence subdirectories."""
    if _find_image(root, 1):
        return [root]
    if not os.path.isdir(root):
        raise DatasetError(f"{root}: not a directory")
    subdirs = sorted(os.path.join(root, d) for d in os.listdir(root)
                     if os.path.isdir(os.path.join(root, d)))
    found = [d for d in subdirs if _find_image(d, 1)]
    if not found:
        raise DatasetError(f"{root}: no img1.ppm/img1.pgm found here or in subdirectories")
    return found


def _load(loader, path):
    try:
        return loader(path)
    except FileNotFoundError as exc:
        raise DatasetError(f"missing file: {path}") from exc
    except ValueError as exc:
        raise DatasetError(f"failed to parse {path}: {exc}") from exc


def load_dataset(directory, name: str | None = None) -> list[DatasetPair]:
    """Load the (1, N) pairs of one sequence directory.

    Every target image ``imgN`` present (N = 2..6) needs a matching
    ``H1toNp``; a homography without its image is also an error.
    """
    name = name or os.path.basename(os.path.normpath(directory)).lower()
    ref_path = _find_image(directory, 1)
    if ref_path is None:
        raise DatasetError(f"missing file: {os.path.join(directory, 'img1.ppm')}")
    ref = _load(load_image, ref_path)
    pairs = []
    for k in range(2, 7):
        img_path = _find_image(directory, k)
        h_path = os.path.join(directory, f"H1to{k}p")
        if img_path is None:
            if os.path.exists(h_path):
                raise DatasetError(
                    f"missing file: {os.path.join(directory, f'img{k}.ppm')} "
                    f"(required by {h_path})")
            continue
        if not os.path.isfile(h_path):
            raise DatasetError(f"missing file: {h_path}")
        H = _load(read_homography, h_path)
        pairs.append(DatasetPair(name, 1, k, ref, _load(load_image, img_path), H))
    if not pairs:
        raise DatasetError(f"{directory}: no target images img2..img6")
    return pairs


def extract(img: GrayImage, params: ExtractionParams, pattern=None):
    """Detect on the raw image, describe on the box-smoothed one."""
    pattern = pattern or make_pattern(params.pattern_seed)
    kps = detect_fast(img, params.threshold, params.max_keypoints)
    return kps, describe_all(box_smooth(img), kps, pattern)


def run_pair(pair: DatasetPair, params: ExtractionParams = ExtractionParams(),
             modes: Sequence[str] = DEFAULT_MODES,
             fuzzy_cfg: FuzzyMatcherConfig | None = None, eps: float = 3.0,
             ransac_iters: int = 0, seed: int = DEFAULT_SEED) -> list[EvaluationRecord]:
    """Evaluate every mode on one image pair.

    ``ns_per_decision`` is the single-threaded wall time of the matching
    stage (distances plus decisions) divided by ``|A| * |B|``. With
    ``ransac_iters > 0`` a RANSAC homography is also fitted to each mode's
    matches and its inlier count stored in ``ransac_inliers``.
    """
    modes = parse_modes(modes)
    cfg = fuzzy_cfg or FuzzyMatcherConfig()
    pattern = make_pattern(params.pattern_seed)
    kps_a, desc_a = extract(pair.ref_image, params, pattern)
    kps_b, desc_b = extract(pair.target_image, params, pattern)

    if not kps_a or not kps_b:
        log.warning("%s %s: no keypoints (%d / %d), reporting M = CM = 0",
                    pair.name, pair.pair, len(kps_a), len(kps_b))
        return [EvaluationRecord(pair.name, pair.pair, m, 0, 0, 0.0) for m in modes]

    comparisons = len(kps_a) * len(kps_b)
    records = []
    for mode in modes:
        start = time.perf_counter_ns()
        if mode == "fuzzy":
            matches = match_fuzzy(desc_a, desc_b, cfg)
        else:
            matches = match_constant(desc_a, desc_b, int(mode[1:]))
        elapsed = time.perf_counter_ns() - start
        cm = count_correct(matches, kps_a, kps_b, pair.H_gt, eps)

        inliers = None
        if ransac_iters > 0 and len(matches) >= 4:
            try:
                _, flags = ransac_homography(matches, kps_a, kps_b, ransac_iters,
                                             eps, seed)
                inliers = int(flags.sum())
            except DegenerateConfigurationError as exc:
                log.info("%s %s %s: RANSAC failed: %s", pair.name, pair.pair, mode, exc)
        records.append(EvaluationRecord(pair.name, pair.pair, mode, len(matches), cm,
                                        max(elapsed, 1) / comparisons, inliers))
        log.debug("%s %s %-5s M=%d CM=%d ransac=%s", pair.name, pair.pair, mode,
                  len(matches), cm, inliers)
    return records


def sort_records(records: Iterable[EvaluationRecord]) -> list[EvaluationRecord]:
    def key(r):
        ref, tgt = (int(v) for v in r.pair.split("-"))
        return (r.dataset, ref, tgt, _mode_key(r.mode))
    return sorted(records, key=key)


def evaluate(root, params: ExtractionParams = ExtractionParams(),
             modes: Sequence[str] = DEFAULT_MODES,
             fuzzy_cfg: FuzzyMatcherConfig | None = None, eps: float = 3.0,
             ransac_iters: int = 0, seed: int = DEFAULT_SEED) -> list[EvaluationRecord]:
    """Run :func:`run_pair` over every pair of every sequence under ``root``."""
    records = []
    for directory in find_datasets(root):
        for pair in load_dataset(directory):
            records += run_pair(pair, params, modes, fuzzy_cfg, eps, ransac_iters, seed)
    return sort_records(records)


def emit_csv(records: Iterable[EvaluationRecord], path) -> None:
    """Write records as ``dataset,pair,mode,M,CM,ns_per_decision``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in sort_records(records):
            writer.writerow([r.dataset, r.pair, r.mode, r.M, r.CM,
                             f"{r.ns_per_decision:.3f}"])


def summary_table(records: Sequence[EvaluationRecord]) -> str:
    """Table-1 style text: one row per pair, ``M CM`` per mode."""
    records = sort_records(records)
    modes = sorted({r.mode for r in records}, key=_mode_key)
    rows: dict[tuple[str, str], dict[str, EvaluationRecord]] = {}
    for r in records:
        rows.setdefault((r.dataset, r.pair), {})[r.mode] = r
    head = f"{'dataset':<18}" + "".join(f"{m:>14}" for m in modes)
    lines = [head, f"{'':<18}" + "".join(f"{'M':>8}{'CM':>6}" for _ in modes)]
    for (ds, pr), by_mode in rows.items():
        cells = "".join(
            f"{by_mode[m].M:>8}{by_mode[m].CM:>6}" if m in by_mode else f"{'-':>14}"
            for m in modes)
        lines.append(f"{ds + ' (' + pr + ')':<18}{cells}")
    return "\n".join(lines)


def mean_ns_per_decision(records: Sequence[EvaluationRecord], mode: str = "fuzzy") -> float:
    vals = [r.ns_per_decision for r in records if r.mode == mode and r.ns_per_decision > 0]
    return float(np.mean(vals)) if vals else 0.0
