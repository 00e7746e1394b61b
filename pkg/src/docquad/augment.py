"""Online augmentation: random crop, random 3-D rotation, photometric jitter.

Every stage maps the image and the object quad through one shared transform,
so the quad always matches the pixels. Randomness comes from an explicit
``numpy.random.Generator`` (PCG64); stages only ever call ``rng.random()``,
one scalar per draw, in the documented order:

* crop: fill fraction, horizontal offset, vertical offset
* rotation: roll, pitch, yaw (redrawn as a triple if a quad corner would end
  up too close to or behind the camera plane)
* photometric: negate?, blur?, hsv?, blur sigma, hue shift, saturation scale,
  value scale (parameters are drawn whether or not the branch fires)
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import raster
from .exceptions import InvalidParameter, ObjectTooLarge
from .geometry import (
    RotationAngles,
    apply_homography,
    quad_bounds,
    rotation_homography,
    rotation_matrix,
    similarity,
    validate_quad,
)
from .validation import check_image, check_probability, check_range, check_rng, sample_rng

ROLL_CAP = 45.0
# minimum depth (in focal units) of a rotated quad corner
_MIN_DEPTH = 0.25
_MAX_REDRAWS = 100


@dataclass(frozen=True)
class AugmentConfig:
    """Augmentation settings.

    ``sigma`` bounds pitch and yaw; roll is bounded by ``min(sigma, 45)``.
    The photometric branch probabilities default to 5 %, 15 % and 100 %.
    """

    sigma: float = 55.0
    photometric_enabled: bool = True
    p_negative: float = 0.05
    p_blur: float = 0.15
    p_hsv: float = 1.0
    hue_shift_max: float = 36.0
    sat_scale_range: tuple = (0.7, 1.3)
    val_scale_range: tuple = (0.7, 1.3)
    blur_sigma_range: tuple = (0.5, 2.0)
    out_w: int = 256
    out_h: int = 256
    object_fill_range: tuple = (0.4, 0.85)
    focal: float | None = None
    margin: float = 1.0
    fill: tuple = (0, 0, 0)

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise InvalidParameter(f"sigma must be >= 0, got {self.sigma!r}")
        for name in ("p_negative", "p_blur", "p_hsv"):
            check_probability(getattr(self, name), name)
        check_range(self.sat_scale_range, "sat_scale_range", lower=0.0)
        check_range(self.val_scale_range, "val_scale_range", lower=0.0)
        lo, _ = check_range(self.blur_sigma_range, "blur_sigma_range")
        if lo <= 0:
            raise InvalidParameter("blur_sigma_range must be positive")
        lo, hi = check_range(self.object_fill_range, "object_fill_range")
        if lo <= 0 or hi >= 1:
            raise InvalidParameter("object_fill_range must lie inside (0, 1)")
        if self.hue_shift_max < 0:
            raise InvalidParameter("hue_shift_max must be >= 0")
        if int(self.out_w) < 8 or int(self.out_h) < 8:
            raise InvalidParameter("output canvas must be at least 8x8")
        if self.margin < 0 or 2 * self.margin >= min(self.out_w, self.out_h) - 1:
            raise InvalidParameter("margin does not leave room on the canvas")
        if self.focal is not None and not self.focal > 0:
            raise InvalidParameter("focal must be > 0")

    @property
    def roll_max(self):
        return min(float(self.sigma), ROLL_CAP)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass
class Sample:
    """An image with its object quad; ``info`` collects per-stage parameters."""

    image: np.ndarray
    quad: np.ndarray
    info: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PhotometricDraw:
    negate: bool
    blur_sigma: float | None
    hsv: tuple | None  # (hue_shift, sat_scale, val_scale)


def _uniform(rng, lo, hi):
    return lo + (hi - lo) * float(rng.random())


def _window(size, margin):
    return margin, size - 1 - margin


# ---------------------------------------------------------------------------
# crop


def random_crop(sample, rng, cfg):
    """Place the object at a random scale and position on a fresh canvas.

    The scale is chosen so the object's bounding box spans a fraction of the
    output width drawn from ``cfg.object_fill_range``, capped so it also fits
    vertically; the offsets keep every vertex at least ``cfg.margin`` pixels
    inside the canvas.

    Raises:
        ObjectTooLarge: if the object cannot fit at the minimum fill fraction.
    """
    rng = check_rng(rng)
    img = check_image(sample.image)
    quad = validate_quad(sample.quad)
    out_w, out_h = int(cfg.out_w), int(cfg.out_h)
    x0, y0, x1, y1 = quad_bounds(quad)
    bw, bh = x1 - x0, y1 - y0
    lo_x, hi_x = _window(out_w, cfg.margin)
    lo_y, hi_y = _window(out_h, cfg.margin)
    fit = min((hi_x - lo_x) / out_w, (hi_y - lo_y) * bw / (bh * out_w))
    f_lo, f_hi = cfg.object_fill_range
    if fit < f_lo:
        raise ObjectTooLarge(
            f"object ({bw:.1f}x{bh:.1f}) cannot span {f_lo:.2f} of a {out_w}x{out_h} canvas"
        )
    fill = _uniform(rng, f_lo, min(f_hi, fit))
    scale = fill * out_w / bw
    tx = _uniform(rng, lo_x - scale * x0, hi_x - scale * x1)
    ty = _uniform(rng, lo_y - scale * y0, hi_y - scale * y1)
    h = similarity(scale, tx, ty)
    out = raster.warp_perspective(img, h, out_w, out_h, fill=cfg.fill)
    info = dict(sample.info)
    info["crop"] = {"scale": scale, "tx": tx, "ty": ty, "fill": fill, "homography": h}
    return Sample(out, apply_homography(h, quad), info)


# ---------------------------------------------------------------------------
# rotation


def draw_rotation_angles(rng, cfg):
    """Draw ``RotationAngles`` with |roll| <= roll_max and |pitch|, |yaw| <= sigma."""
    rng = check_rng(rng)
    roll = _uniform(rng, -cfg.roll_max, cfg.roll_max)
    pitch = _uniform(rng, -cfg.sigma, cfg.sigma)
    yaw = _uniform(rng, -cfg.sigma, cfg.sigma)
    return RotationAngles(roll, pitch, yaw)


def _depths(angles, quad, center, focal):
    """Camera-space depth (in focal units) of each quad vertex after tilting the plane."""
    r = rotation_matrix(angles)
    offsets = (quad - center) / focal
    return 1.0 + offsets @ r[2, :2]


def _canvas_fit(quad, out_w, out_h, margin):
    """Similarity (scale <= 1, minimal shift) bringing ``quad`` inside the margin window."""
    x0, y0, x1, y1 = quad_bounds(quad)
    lo_x, hi_x = _window(out_w, margin)
    lo_y, hi_y = _window(out_h, margin)
    scale = min(1.0, (hi_x - lo_x) / max(x1 - x0, 1e-12), (hi_y - lo_y) / max(y1 - y0, 1e-12))
    tx = float(np.clip(0.0, lo_x - scale * x0, hi_x - scale * x1))
    ty = float(np.clip(0.0, lo_y - scale * y0, hi_y - scale * y1))
    return similarity(scale, tx, ty)


def random_3d_rotation(sample, rng, cfg):
    """Rotate the virtual camera by random roll, pitch and yaw.

    The rotation homography is taken about the image centre with focal length
    ``cfg.focal`` (default: the larger image side). A follow-up similarity
    shrinks and shifts the result only as much as needed to keep the quad
    inside the canvas. The output keeps the input dimensions.
    """
    rng = check_rng(rng)
    img = check_image(sample.image)
    quad = validate_quad(sample.quad)
    h_img, w_img = img.shape[:2]
    center = np.array([(w_img - 1) / 2.0, (h_img - 1) / 2.0])
    focal = float(cfg.focal) if cfg.focal is not None else float(max(w_img, h_img))

    angles = draw_rotation_angles(rng, cfg)
    redraws = 0
    while _depths(angles, quad, center, focal).min() < _MIN_DEPTH:
        if redraws == _MAX_REDRAWS:
            angles = RotationAngles(0.0, 0.0, 0.0)
            break
        angles = draw_rotation_angles(rng, cfg)
        redraws += 1

    rot = rotation_homography(angles, center, focal)
    fit = _canvas_fit(apply_homography(rot, quad), w_img, h_img, cfg.margin)
    h = fit @ rot
    out = raster.warp_perspective(img, h, w_img, h_img, fill=cfg.fill)
    info = dict(sample.info)
    info["rotation"] = {"angles": angles, "redraws": redraws, "homography": h}
    return Sample(out, apply_homography(h, quad), info)


# ---------------------------------------------------------------------------
# photometric


def draw_photometric(rng, cfg):
    """Decide which photometric branches fire and draw their parameters."""
    rng = check_rng(rng)
    do_neg = float(rng.random()) < cfg.p_negative
    do_blur = float(rng.random()) < cfg.p_blur
    do_hsv = float(rng.random()) < cfg.p_hsv
    sigma = _uniform(rng, *cfg.blur_sigma_range)
    hue = _uniform(rng, -cfg.hue_shift_max, cfg.hue_shift_max)
    sat = _uniform(rng, *cfg.sat_scale_range)
    val = _uniform(rng, *cfg.val_scale_range)
    return PhotometricDraw(
        negate=do_neg,
        blur_sigma=sigma if do_blur else None,
        hsv=(hue, sat, val) if do_hsv else None,
    )


def apply_photometric(img, draw):
    """Apply a :class:`PhotometricDraw`: negate, then blur, then HSV."""
    out = check_image(img)
    if draw.negate:
        out = raster.negate(out)
    if draw.blur_sigma is not None:
        out = raster.gaussian_blur(out, draw.blur_sigma)
    if draw.hsv is not None:
        out = raster.hsv_adjust(out, *draw.hsv)
    return out.copy() if out is img else out


def photometric(img, rng, cfg):
    """Randomly negate, blur and recolour ``img`` with the configured probabilities."""
    return apply_photometric(img, draw_photometric(rng, cfg))


# ---------------------------------------------------------------------------
# pipeline


def augment_sample(sample, rng, cfg):
    """Crop, rotate, then (if enabled) photometric jitter."""
    rng = check_rng(rng)
    out = random_crop(sample, rng, cfg)
    out = random_3d_rotation(out, rng, cfg)
    if cfg.photometric_enabled:
        draw = draw_photometric(rng, cfg)
        out = Sample(apply_photometric(out.image, draw), out.quad, {**out.info, "photometric": draw})
    return out


def augment_many(sample, seed, count, cfg):
    """Yield ``count`` augmentations of ``sample``; item ``i`` uses its own stream."""
    for i in range(int(count)):
        yield augment_sample(sample, sample_rng(seed, i), cfg)
