"""Single-item latency benchmarks.

Each timed call processes exactly one item (batch size 1) on the calling
thread; wall time comes from ``time.perf_counter_ns``.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from ..augment import AugmentConfig, Sample, augment_sample
from ..detect import DecodeConfig, DetectionGrid, N_CHANNELS, detect, encode_target
from ..exceptions import InvalidParameter, UnknownOperation
from ..ocr_metric import NormalizeConfig, ocr_score
from ..rectify import RectifyConfig, rectify_document
from ..validation import sample_rng
from .fixtures import FixtureConfig, generate_fixture

OPERATIONS = ("decode", "rectify", "augment", "score", "pipeline")


@dataclass(frozen=True)
class BenchStats:
    op: str
    n: int
    mean_ms: float
    p50_ms: float
    p95_ms: float
    min_ms: float
    max_ms: float

    def to_dict(self):
        return asdict(self)


def _grid_payload(quad, rows, cols, seed):
    """Detector-like grid: a confident blob at the object centre, low noise elsewhere."""
    rng = np.random.Generator(np.random.PCG64(seed))
    target = encode_target(quad, rows, cols)
    cells = np.array(target.cells)
    inside = cells[..., 0] > 0
    noise = rng.random((rows, cols)) * 0.3
    ii, jj = np.nonzero(inside)
    ci, cj = ii.mean(), jj.mean()
    dist2 = (ii - ci) ** 2 + (jj - cj) ** 2
    prob = noise.copy()
    prob[ii, jj] = np.maximum(noise[ii, jj], np.exp(-dist2 / 4.0))
    cells[..., 0] = prob
    cells[~inside, 1:] = rng.normal(0.0, 0.5, size=(int((~inside).sum()), N_CHANNELS - 1))
    return DetectionGrid(rows, cols, cells, target.stride, target.alpha)


def default_payload(op_name, seed=0):
    """Representative single-item input for ``op_name``.

    * decode: a 40 x 64 x 7 grid (640 x 1024 px at stride 16)
    * rectify: a 1000 x 700 scene rectified to 600 x 400
    * augment: a 1000 x 700 scene augmented onto a 256 x 256 canvas
    * score: six entities with a few OCR errors
    * pipeline: decode, select, rectify and score on one scene
    """
    if op_name not in OPERATIONS:
        raise UnknownOperation(f"unknown benchmark op {op_name!r}; expected one of {OPERATIONS}")
    scene_cfg = FixtureConfig(width=1000, height=700, doc_width=480, corner_patch=24)
    scene = generate_fixture(sample_rng(seed, 0), scene_cfg)
    gt = scene.entities
    pred = [e.text[:-1] + "#" if k % 2 else e.text for k, e in enumerate(gt)]
    if op_name == "decode":
        fx = generate_fixture(sample_rng(seed, 1), FixtureConfig(width=1024, height=640, doc_width=360))
        return {"grid": _grid_payload(fx.quad, 40, 64, seed), "cfg": DecodeConfig()}
    if op_name == "rectify":
        return {"image": scene.image, "quad": scene.quad, "cfg": RectifyConfig(aspect=1.5, target_width=600)}
    if op_name == "augment":
        return {"sample": Sample(scene.image, scene.quad), "cfg": AugmentConfig(sigma=55.0), "seed": seed}
    if op_name == "score":
        return {"gt": gt, "pred": pred, "norm": NormalizeConfig()}
    rows, cols = -(-scene_cfg.height // 16), -(-scene_cfg.width // 16)
    return {
        "grid": _grid_payload(scene.quad, rows, cols, seed),
        "image": scene.image,
        "gt": gt,
        "pred": pred,
        "decode_cfg": DecodeConfig(),
        "rectify_cfg": RectifyConfig(aspect=scene_cfg.aspect, target_width=600),
    }


def _pipeline(p):
    det = detect(p["grid"], p["decode_cfg"])
    if det is not None:
        rectify_document(p["image"], det.quad, p["rectify_cfg"])
    return ocr_score(p["gt"], p["pred"])


def _runner(op_name, payload):
    if op_name == "decode":
        return lambda i: detect(payload["grid"], payload["cfg"])
    if op_name == "rectify":
        return lambda i: rectify_document(payload["image"], payload["quad"], payload["cfg"])
    if op_name == "augment":
        return lambda i: augment_sample(payload["sample"], sample_rng(payload["seed"], i), payload["cfg"])
    if op_name == "score":
        return lambda i: ocr_score(payload["gt"], payload["pred"], payload["norm"])
    return lambda i: _pipeline(payload)


def bench(op_name, payload=None, iterations=100, warmup=5, seed=0):
    """Time ``iterations`` single-item calls of ``op_name`` after ``warmup`` untimed calls.

    Raises:
        UnknownOperation: for an op outside :data:`OPERATIONS`.
        InvalidParameter: if ``iterations < 1`` or ``warmup < 0``.
    """
    if op_name not in OPERATIONS:
        raise UnknownOperation(f"unknown benchmark op {op_name!r}; expected one of {OPERATIONS}")
    if int(iterations) < 1:
        raise InvalidParameter("iterations must be >= 1")
    if int(warmup) < 0:
        raise InvalidParameter("warmup must be >= 0")
    if payload is None:
        payload = default_payload(op_name, seed)
    run = _runner(op_name, payload)
    for i in range(int(warmup)):
        run(i)
    times = np.empty(int(iterations))
    for i in range(int(iterations)):
        t0 = time.perf_counter_ns()
        run(i)
        times[i] = (time.perf_counter_ns() - t0) / 1e6
    p50, p95 = np.percentile(times, [50, 95])
    return BenchStats(
        op=op_name,
        n=int(iterations),
        mean_ms=float(times.mean()),
        p50_ms=float(p50),
        p95_ms=float(p95),
        min_ms=float(times.min()),
        max_ms=float(times.max()),
    )
