"""Detection-grid semantics.

A detector emits, for each ``stride x stride`` cell, an objectness
probability and six affine parameters mapping a canonical square (side 1,
centred on the origin) into the object quad. In image pixels a canonical
vertex ``q`` of cell ``(i, j)`` decodes to::

    x = stride * (alpha * (max(a1, 0) * qx + a2 * qy + a3) + j + 0.5)
    y = stride * (alpha * (a4 * qx + max(a5, 0) * qy + a6) + i + 0.5)

Channel layout of ``cells[i, j]``: ``[p, a1, a2, a3, a4, a5, a6]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidCell, InvalidParameter, OutOfRange, ShapeMismatch
from .geometry import CANONICAL_SQUARE, fit_affine, quad_bounds, quad_iou, validate_quad
from .validation import check_probability

N_CHANNELS = 7


@dataclass(frozen=True)
class DetectionGrid:
    rows: int
    cols: int
    cells: np.ndarray
    stride: int = 16
    alpha: float = 4.0

    def __post_init__(self):
        if int(self.rows) < 1 or int(self.cols) < 1:
            raise ShapeMismatch("grid dimensions must be >= 1")
        if int(self.stride) < 1:
            raise InvalidParameter("stride must be >= 1")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidParameter("alpha must be > 0")
        cells = np.asarray(self.cells, dtype=np.float64)
        expected = (int(self.rows), int(self.cols), N_CHANNELS)
        if cells.size != np.prod(expected):
            raise ShapeMismatch(f"grid data has {cells.size} values, expected {np.prod(expected)}")
        cells = cells.reshape(expected)
        if not np.all(np.isfinite(cells)):
            raise OutOfRange("grid contains non-finite values")
        prob = cells[..., 0]
        if prob.min() < 0 or prob.max() > 1:
            raise OutOfRange("probabilities must lie in [0, 1]")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "rows", int(self.rows))
        object.__setattr__(self, "cols", int(self.cols))
        object.__setattr__(self, "stride", int(self.stride))
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def zeros(cls, rows, cols, stride=16, alpha=4.0):
        return cls(rows, cols, np.zeros((rows, cols, N_CHANNELS)), stride, alpha)

    @property
    def probabilities(self):
        return self.cells[..., 0]


@dataclass(frozen=True)
class Detection:
    quad: np.ndarray
    confidence: float
    cell: tuple | None = None


@dataclass(frozen=True)
class DecodeConfig:
    conf_threshold: float = 0.35
    nms_iou: float = 0.3

    def __post_init__(self):
        check_probability(self.conf_threshold, "conf_threshold")
        check_probability(self.nms_iou, "nms_iou")


def _decode(grid, rows, cols):
    """Decode cells at index arrays ``rows``/``cols`` into an (N, 4, 2) array."""
    params = grid.cells[rows, cols, 1:]
    a1 = np.maximum(params[:, 0], 0.0)[:, None]
    a5 = np.maximum(params[:, 4], 0.0)[:, None]
    qx = CANONICAL_SQUARE[:, 0][None, :]
    qy = CANONICAL_SQUARE[:, 1][None, :]
    u = a1 * qx + params[:, 1:2] * qy + params[:, 2:3]
    v = params[:, 3:4] * qx + a5 * qy + params[:, 5:6]
    x = grid.stride * (grid.alpha * u + np.asarray(cols)[:, None] + 0.5)
    y = grid.stride * (grid.alpha * v + np.asarray(rows)[:, None] + 0.5)
    return np.stack([x, y], axis=-1)


def decode_cell(grid, i, j):
    """Decode the quad and confidence stored at cell ``(i, j)``.

    Raises:
        InvalidCell: if the index is outside the grid.
    """
    if not (0 <= i < grid.rows and 0 <= j < grid.cols):
        raise InvalidCell(f"cell ({i}, {j}) outside a {grid.rows}x{grid.cols} grid")
    quad = _decode(grid, np.array([i]), np.array([j]))[0]
    return Detection(quad, float(grid.cells[i, j, 0]), (int(i), int(j)))


def decode_grid(grid, cfg=DecodeConfig()):
    """All cells with confidence >= ``cfg.conf_threshold``.

    Sorted by descending confidence; ties keep row-major order.
    """
    prob = grid.probabilities
    rows, cols = np.nonzero(prob >= cfg.conf_threshold)
    if rows.size == 0:
        return []
    conf = prob[rows, cols]
    order = np.lexsort((cols, rows, -conf))
    rows, cols, conf = rows[order], cols[order], conf[order]
    quads = _decode(grid, rows, cols)
    return [
        Detection(quads[k], float(conf[k]), (int(rows[k]), int(cols[k])))
        for k in range(rows.size)
    ]


def _boxes_disjoint(a, b):
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    return ax1 <= bx0 or bx1 <= ax0 or ay1 <= by0 or by1 <= ay0


def nms(candidates, iou_thresh):
    """Greedy non-maximum suppression.

    Candidates are (stably) re-sorted by descending confidence; one is kept
    when its IoU with every detection kept so far is below ``iou_thresh``.
    """
    ordered = sorted(candidates, key=lambda d: -d.confidence)
    kept, kept_boxes = [], []
    for det in ordered:
        box = quad_bounds(det.quad)
        if all(
            _boxes_disjoint(box, kb) or quad_iou(det.quad, k.quad) < iou_thresh
            for k, kb in zip(kept, kept_boxes)
        ):
            kept.append(det)
            kept_boxes.append(box)
    return kept


def select_top(candidates):
    """Highest-confidence detection (earliest on ties), or ``None`` if empty."""
    best = None
    for det in candidates:
        if best is None or det.confidence > best.confidence:
            best = det
    return best


def detect(grid, cfg=DecodeConfig()):
    """Decode, suppress duplicates and return the single best detection."""
    return select_top(nms(decode_grid(grid, cfg), cfg.nms_iou))


def _cells_inside(quad, rows, cols, stride):
    """Boolean (rows, cols) mask of cell centres inside ``quad`` (even-odd rule)."""
    cy = (np.arange(rows) + 0.5) * stride
    cx = (np.arange(cols) + 0.5) * stride
    x, y = np.meshgrid(cx, cy)
    inside = np.zeros(x.shape, dtype=bool)
    for k in range(4):
        x0, y0 = quad[k]
        x1, y1 = quad[(k + 1) % 4]
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < xc)
    return inside


def encode_target(quad, rows, cols, stride=16, alpha=4.0):
    """Ground-truth grid for ``quad``.

    Every cell whose centre lies inside the quad gets probability 1 and the
    least-squares affine parameters taking the canonical square onto the quad
    expressed in that cell's frame ``u = (x / stride - j - 0.5) / alpha``
    (``v`` likewise). Other cells are zero.
    """
    q = validate_quad(quad)
    grid = DetectionGrid.zeros(rows, cols, stride, alpha)
    mask = _cells_inside(q, grid.rows, grid.cols, grid.stride)
    cells = np.zeros((grid.rows, grid.cols, N_CHANNELS))
    if mask.any():
        # the fit has an intercept, so moving between cell frames only shifts a3/a6
        base = fit_affine(CANONICAL_SQUARE, q / (grid.stride * grid.alpha))
        ii, jj = np.nonzero(mask)
        cells[ii, jj, 0] = 1.0
        cells[ii, jj, 1] = base.a1
        cells[ii, jj, 2] = base.a2
        cells[ii, jj, 3] = base.a3 - (jj + 0.5) / grid.alpha
        cells[ii, jj, 4] = base.a4
        cells[ii, jj, 5] = base.a5
        cells[ii, jj, 6] = base.a6 - (ii + 0.5) / grid.alpha
    return DetectionGrid(grid.rows, grid.cols, cells, grid.stride, grid.alpha)
