"""Projective rectification of a document quad onto an upright rectangle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import raster
from .exceptions import DegenerateQuad, InvalidParameter
from .geometry import homography_from_quads, is_simple_quad, orient_homography
from .validation import check_image, check_quad


@dataclass(frozen=True)
class RectifyConfig:
    """Output geometry: ``target_width`` pixels wide, ``width / height == aspect``."""

    aspect: float = 1.5
    target_width: int = 600

    def __post_init__(self):
        if not (math.isfinite(self.aspect) and self.aspect > 0):
            raise InvalidParameter(f"aspect must be > 0, got {self.aspect!r}")
        if int(self.target_width) < 8:
            raise InvalidParameter(f"target_width must be >= 8, got {self.target_width!r}")

    @property
    def size(self):
        """``(width, height)`` of the rectified image."""
        w = int(self.target_width)
        return w, max(1, int(math.floor(w / self.aspect + 0.5)))

    def corners(self):
        w, h = self.size
        return np.array([[0.0, 0.0], [w - 1.0, 0.0], [w - 1.0, h - 1.0], [0.0, h - 1.0]])


def rectification_homography(quad, cfg=RectifyConfig()):
    """Homography taking ``quad`` (TL, TR, BR, BL) onto the output corners."""
    q = check_quad(quad)
    if not is_simple_quad(q):
        raise DegenerateQuad("quad is self-intersecting")
    h = homography_from_quads(q, cfg.corners())
    return orient_homography(h, q)


def rectify_document(img, quad, cfg=RectifyConfig()):
    """Warp the region inside ``quad`` to a ``cfg.size`` upright image.

    Raises:
        DegenerateQuad: for collinear or self-intersecting quads.
    """
    img = check_image(img)
    w, h = cfg.size
    return raster.warp_perspective(img, rectification_homography(quad, cfg), w, h)
