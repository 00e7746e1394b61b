"""Cross-validation, evaluation, benchmarking and synthetic fixtures."""

from .bench import OPERATIONS, BenchStats, bench, default_payload
from .evaluation import SOURCES, evaluate_detection, evaluate_ocr, load_alignments, predict_quad
from .fixtures import FixtureConfig, FixtureScene, generate_fixture, render_document, write_fixture_set
from .folds import PARTITIONS, FoldPlan, Round, load_fold_plan, make_folds, save_fold_plan

__all__ = [
    "OPERATIONS",
    "BenchStats",
    "bench",
    "default_payload",
    "SOURCES",
    "evaluate_detection",
    "evaluate_ocr",
    "load_alignments",
    "predict_quad",
    "FixtureConfig",
    "FixtureScene",
    "generate_fixture",
    "render_document",
    "write_fixture_set",
    "PARTITIONS",
    "FoldPlan",
    "Round",
    "load_fold_plan",
    "make_folds",
    "save_fold_plan",
]
