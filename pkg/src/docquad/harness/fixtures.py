"""Synthetic document scenes standing in for real ID-card photos.

A fixture is a flat "card" with four distinctly coloured corner patches and a
few solid entity bars, composited onto a textured background through a random
homography. The scene records the projected quad, the entity boxes and the
homography that produced it, so every later stage has exact ground truth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import raster
from ..dataset_io import (
    DatasetManifest,
    ManifestItem,
    atomic_write,
    save_manifest,
    write_entities,
    write_grid,
)
from ..detect import detect, encode_target
from ..exceptions import InvalidParameter
from ..geometry import apply_homography, homography_from_quads, orient_homography, quad_bounds
from ..ocr_metric import Entity
from ..validation import check_rng, sample_rng

CORNER_COLORS = ((220, 30, 30), (30, 200, 40), (30, 60, 220), (240, 210, 20))
CARD_COLOR = (236, 232, 220)
BAR_COLOR = (40, 40, 48)
FIELD_NAMES = ("name", "document_number", "birth_date", "nationality", "issuing_authority", "expiry_date")
_ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789ÁÉÍÓÚÃÕÇ"
MODES = ("projective", "affine", "identity")


@dataclass(frozen=True)
class FixtureConfig:
    width: int = 640
    height: int = 480
    doc_width: int = 300
    aspect: float = 1.5
    corner_patch: int = 16
    mode: str = "projective"
    max_rotation: float = 20.0
    scale_range: tuple = (0.85, 1.15)
    shear: float = 0.1
    corner_jitter: float = 0.08
    stride: int = 16
    alpha: float = 4.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidParameter(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.doc_width + 4 > self.width or self.doc_height + 4 > self.height:
            raise InvalidParameter("document does not fit the scene")

    @property
    def doc_height(self):
        return int(math.floor(self.doc_width / self.aspect + 0.5))

    @property
    def grid_shape(self):
        return math.ceil(self.height / self.stride), math.ceil(self.width / self.stride)


@dataclass
class FixtureScene:
    image: np.ndarray
    quad: np.ndarray
    entities: list
    applied_homography: np.ndarray
    document: np.ndarray
    doc_entities: list
    corner_patch: int

    def corner_points(self):
        """Document-frame centres of the four corner patches (TL, TR, BR, BL)."""
        h_doc, w_doc = self.document.shape[:2]
        d = (self.corner_patch - 1) / 2.0
        return np.array([[d, d], [w_doc - 1 - d, d], [w_doc - 1 - d, h_doc - 1 - d], [d, h_doc - 1 - d]])

    def corner_probes(self):
        """Scene positions of the corner patch centres, with their colours."""
        return apply_homography(self.applied_homography, self.corner_points()), CORNER_COLORS


def _uniform(rng, lo, hi):
    return lo + (hi - lo) * float(rng.random())


def _random_text(rng, n):
    return "".join(_ALPHABET[int(rng.random() * len(_ALPHABET)) % len(_ALPHABET)] for _ in range(n))


def render_document(rng, cfg):
    """Canonical card image and its entities in document coordinates."""
    w, h = cfg.doc_width, cfg.doc_height
    doc = raster.new_image(w, h, CARD_COLOR)
    p = cfg.corner_patch
    doc[:p, :p] = CORNER_COLORS[0]
    doc[:p, w - p:] = CORNER_COLORS[1]
    doc[h - p:, w - p:] = CORNER_COLORS[2]
    doc[h - p:, :p] = CORNER_COLORS[3]

    n_fields = 3 + int(rng.random() * 4) % 4
    top, bottom = p + 6, h - p - 6
    row_h = (bottom - top) / n_fields
    bar_h = max(3, int(row_h * 0.55))
    entities = []
    for k in range(n_fields):
        text = _random_text(rng, 4 + int(rng.random() * 12) % 12)
        y0 = int(top + k * row_h + (row_h - bar_h) / 2)
        x0 = p + 8
        x1 = min(w - p - 8, x0 + int(len(text) * (w - 2 * p - 16) / 16))
        doc[y0:y0 + bar_h, x0:x1] = BAR_COLOR
        entities.append(Entity(FIELD_NAMES[k], text, (float(x0), float(y0), float(x1 - 1), float(y0 + bar_h - 1))))
    return doc, entities


def _background(rng, width, height):
    base = np.array([90 + 60 * rng.random(), 80 + 60 * rng.random(), 70 + 60 * rng.random()])
    y, x = np.mgrid[0:height, 0:width]
    fx, fy = _uniform(rng, 0.02, 0.08), _uniform(rng, 0.02, 0.08)
    wave = 25.0 * np.sin(fx * x + 3 * rng.random()) * np.cos(fy * y + 3 * rng.random())
    return np.clip(base[None, None, :] + wave[..., None], 0, 255).astype(np.uint8)


def _draw_destination(rng, cfg, placement):
    center = placement.mean(axis=0)
    if cfg.mode == "identity":
        return placement.copy()
    theta = math.radians(_uniform(rng, -cfg.max_rotation, cfg.max_rotation))
    s = _uniform(rng, *cfg.scale_range)
    shear = _uniform(rng, -cfg.shear, cfg.shear)
    c, si = math.cos(theta), math.sin(theta)
    lin = s * np.array([[c, -si], [si, c]]) @ np.array([[1.0, shear], [0.0, 1.0]])
    dst = (placement - center) @ lin.T + center
    if cfg.mode == "projective":
        span = np.array([cfg.doc_width, cfg.doc_height], dtype=np.float64)
        jitter = np.array([[_uniform(rng, -1, 1), _uniform(rng, -1, 1)] for _ in range(4)])
        dst = dst + jitter * cfg.corner_jitter * span
    # random shift inside the scene
    x0, y0, x1, y1 = quad_bounds(dst)
    lo = np.array([2.0 - x0, 2.0 - y0])
    hi = np.array([cfg.width - 3.0 - x1, cfg.height - 3.0 - y1])
    if np.any(lo > hi):
        return None
    shift = np.array([_uniform(rng, lo[0], hi[0]), _uniform(rng, lo[1], hi[1])])
    return dst + shift


def generate_fixture(rng, cfg=FixtureConfig()):
    """Render one synthetic scene.

    ``cfg.mode`` selects the distortion: ``"identity"`` (card centred, no
    warp), ``"affine"`` (rotation, scale, shear, shift; the quad stays a
    parallelogram) or ``"projective"`` (affine plus independent corner
    jitter).
    """
    rng = check_rng(rng)
    doc, doc_entities = render_document(rng, cfg)
    w_doc, h_doc = cfg.doc_width, cfg.doc_height
    doc_corners = np.array([[0.0, 0.0], [w_doc - 1.0, 0.0], [w_doc - 1.0, h_doc - 1.0], [0.0, h_doc - 1.0]])
    offset = np.array([(cfg.width - w_doc) // 2, (cfg.height - h_doc) // 2], dtype=np.float64)
    placement = doc_corners + offset

    dst = None
    for _ in range(50):
        dst = _draw_destination(rng, cfg, placement)
        if dst is not None:
            break
    if dst is None:
        dst = placement
    h = orient_homography(homography_from_quads(doc_corners, dst), doc_corners)
    scene = raster.warp_perspective(doc, h, cfg.width, cfg.height, background=_background(rng, cfg.width, cfg.height))
    quad = apply_homography(h, doc_corners)

    entities = []
    for e in doc_entities:
        x0, y0, x1, y1 = e.box
        corners = apply_homography(h, np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]))
        entities.append(Entity(e.name, e.text, tuple(float(v) for v in quad_bounds(corners))))
    return FixtureScene(scene, quad, entities, h, doc, doc_entities, cfg.corner_patch)


def write_fixture_set(out_dir, count, seed, cfg=FixtureConfig()):
    """Write ``count`` fixtures plus a manifest; returns the manifest path.

    Layout: ``images/<id>.png``, ``entities/<id>.json``, ``grids/<id>.json``
    (the encoded ground-truth grid) and ``manifest.json``. Each item's
    ``pred_quad`` is the detection decoded from its grid.
    """
    out = Path(out_dir)
    for sub in ("images", "entities", "grids"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    rows, cols = cfg.grid_shape
    items = []
    for i in range(int(count)):
        scene = generate_fixture(sample_rng(seed, i), cfg)
        item_id = f"fx{i:05d}"
        img_path = out / "images" / f"{item_id}.png"
        ent_path = out / "entities" / f"{item_id}.json"
        grid_path = out / "grids" / f"{item_id}.json"
        raster.save_image(scene.image, img_path)
        write_entities(scene.entities, ent_path)
        grid = encode_target(scene.quad, rows, cols, cfg.stride, cfg.alpha)
        write_grid(grid, grid_path)
        det = detect(grid)
        items.append(
            ManifestItem(
                id=item_id,
                image_path=img_path,
                quad=scene.quad,
                entities_path=ent_path,
                grid_path=grid_path,
                pred_quad=None if det is None else det.quad,
            )
        )
    manifest_path = out / "manifest.json"
    save_manifest(DatasetManifest(tuple(items), out), manifest_path)
    meta = {"count": int(count), "seed": int(seed), "config": {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}}
    atomic_write(out / "fixtures.json", json.dumps(meta, indent=2, default=list) + "\n")
    return manifest_path
