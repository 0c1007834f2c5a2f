"""Command-line front end.

Exit codes: 0 success (or in-scope verdict), 1 I/O failure, 2 usage error,
3 out-of-domain verdict.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import DmscopeError, ImageIOError
from .histogram import (DEFAULT_BINNING, BinningConfig, build_histogram, histogram_csv,
                        write_histogram_csv)
from .imageio import list_images, load_corpus, load_labelmap
from .metrics import ConfusionAccumulator, miou
from .observer import (DEFAULT_MIN_BATCH, OUT_OF_DOMAIN, UNCALIBRATED, DomainReference,
                       build_reference, calibrate, evaluate_batch, fixed_clock,
                       sliding_window_observe, utc_now)
from .rankcorr import PairedSeries, kendall_tau
from .reconstruction import parse_reconstructor, score_corpus
from .synthcorpus import KINDS, CorpusSpec, Shift, generate_corpus, write_corpus

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_OUT_OF_DOMAIN = 3


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _write_json(path, obj):
    Path(path).write_text(_dump(obj) + "\n", encoding="utf-8")


def _load_images(directory, *, allow_partial: bool):
    images, failures = load_corpus(directory)
    for name, reason in failures:
        print(f"warning: skipped {name}: {reason}", file=sys.stderr)
    if not images:
        raise ImageIOError(f"{directory}: no loadable images")
    if failures and not allow_partial:
        raise ImageIOError(f"{directory}: {len(failures)} image(s) failed to load")
    return images, failures


def _clock(args):
    return fixed_clock if args.fixed_clock else utc_now


# -- subcommands ---------------------------------------------------------------

def cmd_gen_corpus(args) -> int:
    spec = CorpusSpec(
        kind=args.kind, count=args.count, height=args.height, width=args.width,
        seed=args.seed, class_count=args.classes,
        shift=Shift(args.brightness, args.blur, args.noise),
    )
    corpus = generate_corpus(spec)
    write_corpus(corpus, args.out, pred_flip=args.pred_flip, pred_seed=args.seed)
    print(f"wrote {len(corpus)} {spec.kind} images to {args.out}")
    return EXIT_OK


def cmd_build_reference(args) -> int:
    recon = parse_reconstructor(args.recon)
    images, failures = _load_images(args.images, allow_partial=True)
    ref = build_reference(images, recon, args.bins, workers=args.workers,
                          created_from={"path": os.fspath(args.images),
                                        "failed": [name for name, _ in failures]})
    ref.save(args.profile)
    print(f"reference {ref.reference_id}: {ref.histogram.total} images -> {args.profile}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    ref = DomainReference.load(args.profile)
    images, _ = _load_images(args.images, allow_partial=True)
    ref = calibrate(ref, images, workers=args.workers)
    ref.save(args.out or args.profile)
    print(f"validation DM {ref.validation_dm_dB:.2f} dB -> threshold {ref.threshold_dB:.2f} dB")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    ref = DomainReference.load(args.profile)
    images, _ = _load_images(args.images, allow_partial=True)
    clock = _clock(args)
    if args.window:
        reports = sliding_window_observe(ref, images, args.window, args.stride or args.window,
                                         clock=clock, workers=args.workers,
                                         threshold_dB=args.threshold)
        if args.report:
            _write_json(args.report, [r.to_dict() for r in reports])
        for r in reports:
            print(f"[window {r.window_index}] {r.summary()}")
        worst = OUT_OF_DOMAIN if any(r.verdict == OUT_OF_DOMAIN for r in reports) else None
    else:
        report = evaluate_batch(ref, images, min_batch=args.min_batch, clock=clock,
                                workers=args.workers, threshold_dB=args.threshold)
        if args.report:
            _write_json(args.report, report.to_dict())
        if args.hist_csv:
            write_histogram_csv(args.hist_csv, report.target_histogram)
        print(report.summary())
        if report.verdict == UNCALIBRATED:
            print("note: reference is uncalibrated; run `dmscope calibrate` for a verdict")
        worst = report.verdict
    return EXIT_OUT_OF_DOMAIN if worst == OUT_OF_DOMAIN else EXIT_OK


def cmd_miou(args) -> int:
    gt_paths = list_images(args.labels)
    pred_dir = Path(args.pred)
    if not gt_paths:
        raise ImageIOError(f"{args.labels}: no label maps")
    acc = ConfusionAccumulator(args.classes)
    for gt_path in gt_paths:
        matches = sorted(p for p in pred_dir.glob(gt_path.stem + ".*") if p.is_file())
        if not matches:
            raise ImageIOError(f"{pred_dir}: no prediction for {gt_path.name}")
        gt = load_labelmap(gt_path, args.classes, args.ignore)
        pred = load_labelmap(matches[0], args.classes, args.ignore)
        acc.add(gt, pred)
    ious = acc.iou()
    out = {
        "miou": miou(acc),
        "per_class_iou": [None if np.isnan(v) else float(v) for v in ious],
        "images": len(gt_paths),
    }
    print(_dump(out))
    return EXIT_OK


def _read_series_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    try:
        float(rows[0][0])
    except (ValueError, IndexError):
        rows = rows[1:]  # header
    if any(len(r) < 2 for r in rows):
        raise UsageError(f"{path}: every row needs two columns")
    return [float(r[0]) for r in rows], [float(r[1]) for r in rows]


def _parse_series(text):
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad numeric series {text!r}") from exc


def cmd_kendall(args) -> int:
    if args.csv:
        a, b = _read_series_csv(args.csv)
    elif args.a and args.b:
        a, b = _parse_series(args.a), _parse_series(args.b)
    else:
        raise UsageError("give --csv FILE or both --a and --b")
    result = kendall_tau(PairedSeries(a, b), eps=args.eps)
    print(_dump(result.to_dict()))
    return EXIT_OK


def cmd_hist_export(args) -> int:
    if args.profile:
        hist = DomainReference.load(args.profile).histogram
    elif args.images:
        recon = parse_reconstructor(args.recon)
        images, _ = _load_images(args.images, allow_partial=True)
        hist = build_histogram(score_corpus(recon, images, workers=args.workers), args.bins)
    else:
        raise UsageError("give --profile FILE or --images DIR")
    if args.hist_csv:
        write_histogram_csv(args.hist_csv, hist)
    else:
        sys.stdout.write(histogram_csv(hist))
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def _bins(text):
    try:
        return BinningConfig.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _recon(text):
    try:
        parse_reconstructor(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return text


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dmscope", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, recon=False, bins=False):
        sp.add_argument("--workers", type=int, default=None, help="threads for scoring")
        sp.add_argument("--fixed-clock", action="store_true",
                        help="stamp reports with a constant time for reproducible output")
        if recon:
            sp.add_argument("--recon", type=_recon, default="quantize:8",
                            help="identity | quantize:K | blur_resample:F | pseudo_noise:A[:SEED]")
        if bins:
            sp.add_argument("--bins", type=_bins, default=DEFAULT_BINNING,
                            help="histogram support and width as lo:hi:width (dB)")

    g = sub.add_parser("gen-corpus", help="write a seeded synthetic corpus")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--height", type=int, default=64)
    g.add_argument("--width", type=int, default=64)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--classes", type=int, default=4, help="region count for blotch")
    g.add_argument("--brightness", type=float, default=0.0)
    g.add_argument("--blur", type=int, default=1)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--pred-flip", type=float, default=None,
                   help="also write pred/ label maps with this flip fraction")
    g.add_argument("--out", "--images", dest="out", required=True)
    common(g)
    g.set_defaults(func=cmd_gen_corpus)

    b = sub.add_parser("build-reference", help="build a source-domain profile")
    b.add_argument("--images", required=True)
    b.add_argument("--profile", required=True)
    common(b, recon=True, bins=True)
    b.set_defaults(func=cmd_build_reference)

    c = sub.add_parser("calibrate", help="set the scope threshold from a validation corpus")
    c.add_argument("--profile", required=True)
    c.add_argument("--images", required=True)
    c.add_argument("--out", default=None, help="write here instead of rewriting --profile")
    common(c)
    c.set_defaults(func=cmd_calibrate)

    e = sub.add_parser("evaluate", help="compare a target corpus against a profile")
    e.add_argument("--profile", required=True)
    e.add_argument("--images", required=True)
    e.add_argument("--report", default=None)
    e.add_argument("--hist-csv", default=None)
    e.add_argument("--window", type=int, default=None)
    e.add_argument("--stride", type=int, default=None)
    e.add_argument("--min-batch", type=int, default=DEFAULT_MIN_BATCH)
    e.add_argument("--threshold", type=float, default=None,
                   help="use this threshold (dB) instead of the profile's calibrated one")
    common(e)
    e.set_defaults(func=cmd_evaluate)

    m = sub.add_parser("miou", help="mIoU of prediction label maps against ground truth")
    m.add_argument("--labels", required=True)
    m.add_argument("--pred", required=True)
    m.add_argument("--classes", type=int, required=True)
    m.add_argument("--ignore", type=int, default=255)
    common(m)
    m.set_defaults(func=cmd_miou)

    k = sub.add_parser("kendall", help="Kendall tau-b of two series")
    k.add_argument("--csv", default=None, help="two numeric columns, optional header")
    k.add_argument("--a", default=None, help="comma-separated series")
    k.add_argument("--b", default=None, help="comma-separated series")
    k.add_argument("--eps", type=float, default=0.0, help="tie tolerance")
    common(k)
    k.set_defaults(func=cmd_kendall)

    h = sub.add_parser("hist-export", help="histogram as CSV for plotting")
    h.add_argument("--profile", default=None)
    h.add_argument("--images", default=None)
    h.add_argument("--hist-csv", default=None)
    common(h, recon=True, bins=True)
    h.set_defaults(func=cmd_hist_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dmscope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ImageIOError, OSError) as exc:
        print(f"dmscope: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DmscopeError, ValueError, KeyError) as exc:
        print(f"dmscope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
