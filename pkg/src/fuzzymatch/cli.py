"""Command line entry point: ``fuzzymatch {detect,match,eval}``.

Exit status is 0 on success, 1 on usage errors and 2 on data errors.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys

from . import __version__
from .features import (DescriptorFileError, describe_all, detect_fast, make_pattern,
                       read_descriptors, write_descriptors)
from .fuzzy import FuzzyMatcherConfig, parse_config, parse_mf
from .harness import (DatasetError, ExtractionParams, emit_csv, evaluate,
                      mean_ns_per_decision, parse_modes, summary_table)
from .imageio import ImageFormatError, box_smooth, load_image
from .matcher import match_constant, match_fuzzy
from .rng import DEFAULT_SEED

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 < value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a non-zero unsigned 64-bit integer")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _add_fuzzy_options(p):
    p.add_argument("--low", help="LOW trapezoid a,b,c,d (default 0,0,10,15)")
    p.add_argument("--high", help="HIGH trapezoid a,b,c,d (default 10,15,256,256)")
    p.add_argument("--cutoff", type=float, help="decision level (default 0.5)")
    p.add_argument("--fuzzy-config", metavar="LINE",
                   help='config line "low=a,b,c,d high=a,b,c,d cutoff=v"')


def _fuzzy_config(args) -> FuzzyMatcherConfig:
    try:
        cfg = parse_config(args.fuzzy_config) if args.fuzzy_config else FuzzyMatcherConfig()
        return FuzzyMatcherConfig(
            low=parse_mf(args.low) if args.low else cfg.low,
            high=parse_mf(args.high) if args.high else cfg.high,
            cutoff=args.cutoff if args.cutoff is not None else cfg.cutoff,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fuzzymatch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", help="detect keypoints and write a BD01 descriptor file")
    p.add_argument("--image", required=True)
    p.add_argument("--threshold", type=int, default=20)
    p.add_argument("--max-kp", type=int, default=2000)
    p.add_argument("--seed", type=_u64, default=DEFAULT_SEED, help="sampling pattern seed")
    p.add_argument("--out", required=True)

    p = sub.add_parser("match", help="match two descriptor files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--t", type=int, help="constant threshold in bits (distance < t)")
    mode.add_argument("--fuzzy", action="store_true", help="fuzzy decision")
    _add_fuzzy_options(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="M / CM evaluation over a dataset directory")
    p.add_argument("--dataset", required=True)
    p.add_argument("--modes", default=",".join(("t5", "t10", "t15", "fuzzy")))
    p.add_argument("--eps", type=_positive_float, default=3.0)
    p.add_argument("--ransac-iters", type=int, default=2000)
    p.add_argument("--seed", type=_u64, default=DEFAULT_SEED)
    p.add_argument("--threshold", type=int, default=20)
    p.add_argument("--max-kp", type=int, default=2000)
    _add_fuzzy_options(p)
    p.add_argument("--out", required=True)
    return parser


def cmd_detect(args) -> int:
    if args.threshold < 1 or args.max_kp < 0:
        raise UsageError("--threshold must be >= 1 and --max-kp >= 0")
    img = load_image(args.image)
    kps = detect_fast(img, args.threshold, args.max_kp)
    desc = describe_all(box_smooth(img), kps, make_pattern(args.seed))
    write_descriptors(args.out, kps, desc)
    print(f"{len(kps)} keypoints -> {args.out}")
    return 0


def cmd_match(args) -> int:
    if not args.fuzzy and any(v is not None for v in (args.low, args.high, args.cutoff,
                                                      args.fuzzy_config)):
        raise UsageError("--low/--high/--cutoff/--fuzzy-config require --fuzzy")
    if args.t is not None and not 0 <= args.t <= 256:
        raise UsageError("--t must lie in [0, 256]")
    cfg = _fuzzy_config(args) if args.fuzzy else None
    kps_a, desc_a = read_descriptors(args.a)
    kps_b, desc_b = read_descriptors(args.b)
    if len(kps_b) == 0:
        raise DescriptorFileError(f"{args.b}: descriptor set is empty")
    if args.fuzzy:
        matches = match_fuzzy(desc_a, desc_b, cfg)
    else:
        matches = match_constant(desc_a, desc_b, args.t)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index_a", "index_b", "distance_bits", "degree", "xa", "ya", "xb", "yb"])
        for m in matches:
            ka, kb = kps_a[m.index_a], kps_b[m.index_b]
            degree = "" if m.degree is None else repr(m.degree)
            w.writerow([m.index_a, m.index_b, m.distance_bits, degree,
                        ka.x, ka.y, kb.x, kb.y])
    print(f"{len(matches)} matches of {len(kps_a)} features -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    try:
        modes = parse_modes(args.modes)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.ransac_iters < 0:
        raise UsageError("--ransac-iters must be >= 0")
    cfg = _fuzzy_config(args)
    params = ExtractionParams(args.threshold, args.max_kp, args.seed)
    records = evaluate(args.dataset, params, modes, cfg, args.eps, args.ransac_iters,
                       args.seed)
    emit_csv(records, args.out)
    print(summary_table(records))
    if "fuzzy" in modes:
        print(f"fuzzy decision cost: {mean_ns_per_decision(records) / 1e6:.6f} ms per pair")
    return 0


COMMANDS = {"detect": cmd_detect, "match": cmd_match, "eval": cmd_eval}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fuzzymatch {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ImageFormatError, DescriptorFileError, DatasetError, ValueError) as exc:
        print(f"fuzzymatch {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
