"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 invalid data, 3 file I/O error.
Results are JSON on standard output, or written atomically to ``--out``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .augment import AugmentConfig, Sample, augment_sample
from .dataset_io import (
    atomic_write,
    load_entities,
    load_grid,
    load_manifest,
    load_prediction,
    quad_to_json,
    read_json,
    write_report,
)
from .detect import DecodeConfig, decode_grid, nms, select_top
from .exceptions import DataError, DataIOError, DocQuadError, MalformedFile
from .geometry import quad_iou
from .harness.bench import OPERATIONS, bench
from .harness.evaluation import SOURCES, evaluate_detection, evaluate_ocr, load_alignments
from .harness.fixtures import MODES, FixtureConfig, write_fixture_set
from .harness.folds import load_fold_plan, make_folds, save_fold_plan
from .ocr_metric import NormalizeConfig, align_by_box_iou, align_by_name, score_breakdown
from .raster import load_image, save_image
from .rectify import RectifyConfig, rectification_homography, rectify_document
from .validation import check_quad, sample_rng


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    if hasattr(obj, "_asdict"):
        return obj._asdict()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _dumps(obj):
    return json.dumps(obj, default=_jsonable, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _emit(args, obj):
    text = _dumps(obj)
    if getattr(args, "out", None):
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def _log(args, msg):
    if not args.quiet:
        print(msg, file=sys.stderr)


def _quad_arg(value):
    """A quad given inline as JSON or as the path of a JSON file."""
    text = value.strip()
    if text.startswith("["):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedFile(f"inline quad is not valid JSON ({exc})") from exc
        where = "inline quad"
    else:
        doc = read_json(value)
        where = value
    if isinstance(doc, dict):
        doc = doc.get("quad")
    try:
        return check_quad(doc)
    except (DataError, TypeError, ValueError) as exc:
        raise MalformedFile(f"{where}: {exc}") from exc


def _decode_cfg(args):
    return DecodeConfig(args.conf, args.nms)


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _unit_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {v}")
    return v


def _nonneg_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (np.isfinite(v) and v >= 0):
        raise argparse.ArgumentTypeError(f"expected a finite value >= 0, got {text}")
    return v


# ---------------------------------------------------------------------------
# subcommands


def cmd_iou(args):
    _emit(args, {"iou": quad_iou(_quad_arg(args.a), _quad_arg(args.b))})


def cmd_decode(args):
    grid = load_grid(args.grid)
    kept = nms(decode_grid(grid, _decode_cfg(args)), args.nms)
    best = select_top(kept)

    def det(d):
        return {"quad": quad_to_json(d.quad), "confidence": d.confidence, "cell": list(d.cell)}

    out = {"detection": None if best is None else det(best)}
    if args.all:
        out["candidates"] = [det(d) for d in kept]
    _emit(args, out)


def cmd_rectify(args):
    if (args.quad is None) == (args.grid is None):
        raise UsageError("rectify: give exactly one of --quad or --grid")
    if not args.out:
        raise UsageError("rectify: --out <image.png> is required")
    cfg = RectifyConfig(args.aspect, args.width)
    img = load_image(args.image)
    if args.quad is not None:
        quad = _quad_arg(args.quad)
    else:
        best = select_top(nms(decode_grid(load_grid(args.grid), _decode_cfg(args)), args.nms))
        if best is None:
            raise DataError(f"{args.grid}: no detection above threshold {args.conf}")
        quad = best.quad
    out = rectify_document(img, quad, cfg)
    save_image(out, args.out)
    w, h = cfg.size
    sys.stdout.write(
        _dumps(
            {
                "image": args.out,
                "width": w,
                "height": h,
                "quad": quad_to_json(quad),
                "homography": rectification_homography(quad, cfg).tolist(),
            }
        )
    )


def cmd_augment(args):
    cfg = AugmentConfig(
        sigma=args.sigma,
        photometric_enabled=args.photometric == "on",
        out_w=args.size,
        out_h=args.size,
    )
    img = load_image(args.image)
    quad = _quad_arg(args.quad)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sample = Sample(img, quad)
    written = []
    for i in range(args.count):
        s = augment_sample(sample, sample_rng(args.seed, i), cfg)
        stem = f"aug_{i:05d}"
        save_image(s.image, out_dir / f"{stem}.png")
        sidecar = {"image": f"{stem}.png", "quad": quad_to_json(s.quad), "seed": args.seed, "index": i, **s.info}
        atomic_write(out_dir / f"{stem}.json", _dumps(sidecar))
        written.append(f"{stem}.png")
    _log(args, f"wrote {len(written)} augmentations to {out_dir}")
    _emit(args, {"count": len(written), "out_dir": str(out_dir), "images": written})


def cmd_score_ocr(args):
    gt = load_entities(args.gt)
    form, pred = load_prediction(args.pred)
    if form != args.mode:
        raise DataError(f"{args.pred}: expected a {args.mode!r} prediction, found {form!r}")
    texts = align_by_name(gt, pred) if form == "name" else align_by_box_iou(gt, pred)
    score, rows = score_breakdown(gt, texts, NormalizeConfig(casefold=args.casefold))
    _emit(args, {"score": score, "per_entity": rows})


def cmd_folds(args):
    manifest = load_manifest(args.manifest, check_paths=False)
    plan = make_folds(manifest.ids, args.k, args.seed)
    if args.out:
        save_fold_plan(plan, args.out)
        _log(args, f"wrote {plan.k}-fold plan for {len(manifest)} items to {args.out}")
    else:
        sys.stdout.write(_dumps(plan.to_dict()))


def cmd_eval(args):
    manifest = load_manifest(args.manifest, check_paths=False)
    plan = load_fold_plan(args.folds)
    report = evaluate_detection(manifest, plan, args.source, _decode_cfg(args), workers=args.workers)
    if args.out:
        write_report(report, args.out, args.format)
        _log(args, f"wrote detection report to {args.out}")
    elif args.format == "csv":
        from .dataset_io import report_to_csv

        sys.stdout.write(report_to_csv(report))
    else:
        sys.stdout.write(_dumps(report.to_dict()))


def cmd_eval_ocr(args):
    manifest = load_manifest(args.manifest, check_paths=False)
    alignments = load_alignments(manifest, args.pred_dir, args.mode)
    report = evaluate_ocr(manifest, alignments, NormalizeConfig(casefold=args.casefold))
    if args.out:
        write_report(report, args.out, args.format)
        _log(args, f"wrote OCR report to {args.out}")
    else:
        sys.stdout.write(_dumps(report.to_dict()))


def cmd_bench(args):
    stats = bench(args.op, iterations=args.iters, warmup=args.warmup, seed=args.seed)
    _emit(args, stats.to_dict())


def cmd_fixtures(args):
    cfg = FixtureConfig(mode=args.mode)
    path = write_fixture_set(args.out_dir, args.count, args.seed, cfg)
    _log(args, f"wrote {args.count} fixtures to {args.out_dir}")
    _emit(args, {"manifest": str(path), "count": args.count})


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--quiet", action="store_true", help="suppress progress messages")
    common.add_argument("--out", help="write the result here instead of standard output (rectify: the output PNG)")

    decoding = argparse.ArgumentParser(add_help=False)
    decoding.add_argument("--conf", type=_unit_float, default=0.35, help="objectness threshold")
    decoding.add_argument("--nms", type=_unit_float, default=0.3, help="NMS IoU threshold")

    p = _Parser(prog="docquad", description="Document quad detection, rectification and OCR scoring tools.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text, parents=()):
        sp = sub.add_parser(name, parents=[common, *parents], help=help_text, description=help_text)
        sp.set_defaults(func=func)
        return sp

    sp = add("iou", cmd_iou, "IoU of two quads (JSON files or inline JSON)")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)

    sp = add("decode", cmd_decode, "decode a grid tensor file into the best quad", [decoding])
    sp.add_argument("--grid", required=True, help="grid file (JSON or binary)")
    sp.add_argument("--all", action="store_true", help="also list every detection kept by NMS")

    sp = add("rectify", cmd_rectify, "rectify a document region to an upright image", [decoding])
    sp.add_argument("--image", required=True)
    sp.add_argument("--quad", help="quad JSON file or inline [[x,y],...]")
    sp.add_argument("--grid", help="grid file; decoded first")
    sp.add_argument("--aspect", type=float, default=1.5, help="output width / height")
    sp.add_argument("--width", type=_positive_int, default=600, help="output width in pixels")

    sp = add("augment", cmd_augment, "write augmented copies of an annotated image")
    sp.add_argument("--image", required=True)
    sp.add_argument("--quad", required=True)
    sp.add_argument("--sigma", type=_nonneg_float, default=55.0, help="pitch/yaw bound in degrees")
    sp.add_argument("--photometric", choices=("on", "off"), default="on")
    sp.add_argument("--count", type=_positive_int, default=1)
    sp.add_argument("--size", type=_positive_int, default=256, help="output side length")
    sp.add_argument("--out-dir", required=True)

    sp = add("score-ocr", cmd_score_ocr, "OCR fidelity of one prediction file")
    sp.add_argument("--gt", required=True, help="entities JSON")
    sp.add_argument("--pred", required=True, help="prediction JSON")
    sp.add_argument("--mode", choices=("name", "box"), default="name")
    sp.add_argument("--casefold", action="store_true")

    sp = add("folds", cmd_folds, "assign manifest items to cross-validation bins")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--k", type=_positive_int, default=10)

    sp = add("eval", cmd_eval, "detection IoU report over cross-validation rounds", [decoding])
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--folds", required=True)
    sp.add_argument("--source", choices=SOURCES, default="grids")
    sp.add_argument("--format", choices=("json", "csv"), help="default: from the --out extension")
    sp.add_argument("--workers", type=_positive_int, default=1)

    sp = add("eval-ocr", cmd_eval_ocr, "dataset OCR score from per-item prediction files")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--pred-dir", required=True)
    sp.add_argument("--mode", choices=("name", "box"), default="name")
    sp.add_argument("--casefold", action="store_true")
    sp.add_argument("--format", choices=("json", "csv"))

    sp = add("bench", cmd_bench, "single-item latency of one operation")
    sp.add_argument("--op", choices=OPERATIONS, required=True)
    sp.add_argument("--iters", type=_positive_int, default=100)
    sp.add_argument("--warmup", type=int, default=5)

    sp = add("fixtures", cmd_fixtures, "generate a synthetic dataset with manifest")
    sp.add_argument("--count", type=_positive_int, required=True)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--mode", choices=MODES, default="projective")
    return p


def run(argv=None):
    """Parse ``argv`` and run one subcommand; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "warmup", 0) < 0:
            raise UsageError("bench: --warmup must be >= 0")
        args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (DataIOError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DocQuadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())
