"""Detection and OCR evaluation over a manifest."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from ..dataset_io import Aggregate, EvalReport, ItemResult, load_entities, load_grid, load_prediction
from ..detect import DecodeConfig, detect
from ..exceptions import AlignmentError, DataError, MissingPrediction
from ..geometry import quad_iou
from ..ocr_metric import NormalizeConfig, align_by_box_iou, align_by_name, ocr_score
from .folds import PARTITIONS

SOURCES = ("grids", "quads")


def _mean(values):
    return sum(values) / len(values) if values else None


def predict_quad(item, source, decode_cfg=DecodeConfig()):
    """Predicted quad for one manifest item, or ``None`` when nothing is detected."""
    if source == "grids":
        if item.grid_path is None:
            raise MissingPrediction(item.id, "grid_path")
        det = detect(load_grid(item.grid_path), decode_cfg)
        return None if det is None else det.quad
    if source == "quads":
        if item.pred_quad is None:
            raise MissingPrediction(item.id, "pred_quad")
        return item.pred_quad
    raise DataError(f"unknown prediction source {source!r}; expected one of {SOURCES}")


def _item_iou(item, source, decode_cfg):
    quad = predict_quad(item, source, decode_cfg)
    return 0.0 if quad is None else quad_iou(quad, item.quad)


def evaluate_detection(manifest, plan, source="grids", decode_cfg=DecodeConfig(), workers=1):
    """Per-item IoU and per-round, per-partition means.

    Items with no detection score 0. Aggregates with ``round=None`` are the
    mean of the ten (or ``k``) round means for each partition.
    """
    if source not in SOURCES:
        raise DataError(f"unknown prediction source {source!r}; expected one of {SOURCES}")
    items = list(manifest.items)
    for item in items:
        if (source == "grids" and item.grid_path is None) or (source == "quads" and item.pred_quad is None):
            raise MissingPrediction(item.id, "grid_path" if source == "grids" else "pred_quad")
    assignment = plan.assignment
    missing = [item.id for item in items if item.id not in assignment]
    if missing or len(assignment) != len(items):
        raise DataError(f"fold plan does not match the manifest (unassigned: {missing[:5]})")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            ious = list(pool.map(lambda it: _item_iou(it, source, decode_cfg), items))
    else:
        ious = [_item_iou(it, source, decode_cfg) for it in items]

    by_id = {item.id: iou for item, iou in zip(items, ious)}
    rows = [ItemResult(id=item.id, bin=assignment[item.id], iou=by_id[item.id]) for item in items]
    aggregates = []
    round_means = {p: [] for p in PARTITIONS}
    for r in range(plan.k):
        for part in PARTITIONS:
            vals = [by_id[i] for i in plan.members(r, part)]
            mean = _mean(vals)
            aggregates.append(Aggregate(round=r, partition=part, n=len(vals), mean_iou=mean))
            if mean is not None:
                round_means[part].append(mean)
    for part in PARTITIONS:
        aggregates.append(
            Aggregate(round=None, partition=part, n=len(round_means[part]), mean_iou=_mean(round_means[part]))
        )
    meta = {"kind": "detection", "source": source, "k": plan.k, "seed": plan.seed}
    return EvalReport(rows, aggregates, meta)


def load_alignments(manifest, pred_dir, mode):
    """Aligned prediction texts per item from ``<pred_dir>/<id>.json`` files."""
    from pathlib import Path

    out = {}
    for item in manifest.items:
        if item.entities_path is None:
            raise MissingPrediction(item.id, "entities_path")
        path = Path(pred_dir) / f"{item.id}.json"
        if not path.is_file():
            raise MissingPrediction(item.id, f"prediction file {path}")
        entities = load_entities(item.entities_path)
        form, pred = load_prediction(path)
        if form != mode:
            raise DataError(f"{path}: expected a {mode!r} prediction, found {form!r}")
        out[item.id] = align_by_name(entities, pred) if mode == "name" else align_by_box_iou(entities, pred)
    return out


def evaluate_ocr(manifest, alignments, norm=NormalizeConfig(), entities=None):
    """Per-item OCR score and the dataset mean.

    Args:
        alignments: mapping item id -> list of predicted texts aligned to that
            item's entities.
        entities: optional mapping item id -> entity list; loaded from the
            manifest's ``entities_path`` otherwise.
    """
    rows = []
    for item in manifest.items:
        if item.id not in alignments:
            raise MissingPrediction(item.id, "aligned OCR texts")
        if entities is not None and item.id in entities:
            gt = entities[item.id]
        elif item.entities_path is not None:
            gt = load_entities(item.entities_path)
        else:
            raise MissingPrediction(item.id, "ground-truth entities")
        try:
            score = ocr_score(gt, alignments[item.id], norm)
        except AlignmentError as exc:
            raise AlignmentError(f"item {item.id!r}: {exc}") from exc
        rows.append(ItemResult(id=item.id, ocr_score=score))
    mean = _mean([r.ocr_score for r in rows])
    agg = [Aggregate(round=None, partition="all", n=len(rows), mean_score=mean)]
    return EvalReport(rows, agg, {"kind": "ocr"})
