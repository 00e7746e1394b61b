"""RGB raster operations.

Images are ``numpy.uint8`` arrays of shape (height, width, 3), row-major with
interleaved channels. Pixel ``(x, y)`` sits at integer coordinates, so the
valid sampling domain is ``[0, w - 1] x [0, h - 1]``.
"""

from __future__ import annotations

import math
import os

import numba
import numpy as np

from .exceptions import DataIOError, DegenerateQuad, InvalidParameter
from .geometry import is_singular
from .validation import check_homography, check_image, check_positive

BLACK = (0, 0, 0)

# sampling slack so corners mapped to w-1 by floating point stay in range
_EDGE_EPS = 1e-6
_NO_BACKGROUND = np.zeros((1, 1, 3), dtype=np.uint8)


def new_image(width, height, color=BLACK):
    """Allocate a ``height x width`` image filled with ``color``."""
    if int(width) < 1 or int(height) < 1:
        raise InvalidParameter("image dimensions must be >= 1")
    img = np.empty((int(height), int(width), 3), dtype=np.uint8)
    img[...] = np.asarray(color, dtype=np.uint8)
    return img


@numba.njit(cache=True, nogil=True)
def _warp_kernel(img, inv, out_w, out_h, fill, background, use_background):
    h, w = img.shape[0], img.shape[1]
    out = np.empty((out_h, out_w, 3), np.uint8)
    for v in range(out_h):
        for u in range(out_w):
            ww = inv[2, 0] * u + inv[2, 1] * v + inv[2, 2]
            ok = ww > 1e-12
            x = 0.0
            y = 0.0
            if ok:
                x = (inv[0, 0] * u + inv[0, 1] * v + inv[0, 2]) / ww
                y = (inv[1, 0] * u + inv[1, 1] * v + inv[1, 2]) / ww
                ok = -_EDGE_EPS <= x <= w - 1 + _EDGE_EPS and -_EDGE_EPS <= y <= h - 1 + _EDGE_EPS
            if not ok:
                for c in range(3):
                    out[v, u, c] = background[v, u, c] if use_background else fill[c]
                continue
            x = min(max(x, 0.0), w - 1.0)
            y = min(max(y, 0.0), h - 1.0)
            x0 = int(x)
            y0 = int(y)
            x1 = min(x0 + 1, w - 1)
            y1 = min(y0 + 1, h - 1)
            fx = x - x0
            fy = y - y0
            for c in range(3):
                top = img[y0, x0, c] * (1.0 - fx) + img[y0, x1, c] * fx
                bottom = img[y1, x0, c] * (1.0 - fx) + img[y1, x1, c] * fx
                val = np.rint(top * (1.0 - fy) + bottom * fy)
                out[v, u, c] = np.uint8(min(max(val, 0.0), 255.0))
    return out


def bilinear_sample(img, x, y, fill=BLACK):
    """Bilinearly interpolated RGB value at ``(x, y)`` as three floats.

    Points outside ``[0, w-1] x [0, h-1]`` return ``fill``. This is the scalar
    reference for the per-pixel kernel behind :func:`warp_perspective`.
    """
    img = check_image(img)
    x, y = float(x), float(y)
    if not (math.isfinite(x) and math.isfinite(y)):
        return tuple(float(c) for c in fill)
    inside = -_EDGE_EPS <= x <= img.shape[1] - 1 + _EDGE_EPS and -_EDGE_EPS <= y <= img.shape[0] - 1 + _EDGE_EPS
    if not inside:
        return tuple(float(c) for c in fill)
    # float64 path so half-way values come out exact
    xc, yc = min(max(float(x), 0.0), img.shape[1] - 1), min(max(float(y), 0.0), img.shape[0] - 1)
    x0, y0 = int(xc), int(yc)
    x1, y1 = min(x0 + 1, img.shape[1] - 1), min(y0 + 1, img.shape[0] - 1)
    fx, fy = xc - x0, yc - y0
    src = img.astype(np.float64)
    top = src[y0, x0] * (1 - fx) + src[y0, x1] * fx
    bottom = src[y1, x0] * (1 - fx) + src[y1, x1] * fx
    return tuple(float(v) for v in top * (1 - fy) + bottom * fy)


def _to_uint8(values):
    return np.clip(np.rint(values), 0, 255).astype(np.uint8)


def warp_perspective(img, h, out_w, out_h, fill=BLACK, background=None):
    """Warp ``img`` by the homography ``h`` into an ``out_w x out_h`` canvas.

    ``h`` maps source coordinates to output coordinates; each output pixel is
    pulled back through ``h^-1`` and sampled bilinearly. Output pixels whose
    pre-image falls outside the source, or behind the projective horizon
    (non-positive denominator under ``h`` as given), take ``fill``, or the
    matching pixel of ``background`` when one is supplied.

    Raises:
        DegenerateQuad: if ``h`` is singular.
    """
    img = check_image(img)
    m = check_homography(h)
    out_w, out_h = int(out_w), int(out_h)
    if out_w < 1 or out_h < 1:
        raise InvalidParameter("output dimensions must be >= 1")
    if is_singular(m):
        raise DegenerateQuad("homography is singular")
    # no rescaling: the sign of w carries the visible side
    inv = np.linalg.inv(m)
    fill = np.asarray(fill, dtype=np.uint8).reshape(3)
    if background is not None:
        background = check_image(background, name="background")
        if background.shape != (out_h, out_w, 3):
            raise InvalidParameter("background must match the output dimensions")
        return _warp_kernel(img, inv, out_w, out_h, fill, background, True)
    return _warp_kernel(img, inv, out_w, out_h, fill, _NO_BACKGROUND, False)


def negate(img):
    """Photographic negative: every channel ``c`` becomes ``255 - c``."""
    return 255 - check_image(img)


def gaussian_kernel(sigma):
    """Normalised 1-D Gaussian of radius ``ceil(3 * sigma)``."""
    sigma = float(check_positive(sigma, "sigma"))
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def _convolve_axis(arr, kernel, axis):
    radius = len(kernel) // 2
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(arr, pad, mode="edge")
    n = arr.shape[axis]
    out = np.zeros_like(arr)
    for offset, weight in enumerate(kernel):
        out += weight * np.take(padded, np.arange(offset, offset + n), axis=axis)
    return out


def gaussian_blur(img, sigma):
    """Separable Gaussian blur with edge clamping.

    Raises:
        InvalidParameter: if ``sigma <= 0``.
    """
    img = check_image(img)
    try:
        kernel = gaussian_kernel(sigma)
    except InvalidParameter as exc:
        raise InvalidParameter(f"blur sigma must be > 0, got {sigma!r}") from exc
    out = _convolve_axis(img.astype(np.float64), kernel, axis=1)
    out = _convolve_axis(out, kernel, axis=0)
    return _to_uint8(out)


def rgb_to_hsv(rgb):
    """Vectorised RGB (0-255) to HSV with h in degrees [0, 360), s and v in [0, 1]."""
    rgb = np.asarray(rgb, dtype=np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    delta = maxc - minc
    v = maxc
    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    d = np.where(delta > 0, delta, 1.0)
    h = np.where(
        maxc == r,
        ((g - b) / d) % 6.0,
        np.where(maxc == g, (b - r) / d + 2.0, (r - g) / d + 4.0),
    )
    h = np.where(delta > 0, h * 60.0, 0.0) % 360.0
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv):
    """Inverse of :func:`rgb_to_hsv`; returns float RGB in [0, 255]."""
    hsv = np.asarray(hsv, dtype=np.float64)
    h = (hsv[..., 0] % 360.0) / 60.0
    s, v = hsv[..., 1], hsv[..., 2]
    c = v * s
    x = c * (1.0 - np.abs(h % 2.0 - 1.0))
    m = v - c
    sector = np.floor(h).astype(np.intp) % 6
    zeros = np.zeros_like(c)
    table = np.stack(
        [
            np.stack([c, x, zeros], axis=-1),
            np.stack([x, c, zeros], axis=-1),
            np.stack([zeros, c, x], axis=-1),
            np.stack([zeros, x, c], axis=-1),
            np.stack([x, zeros, c], axis=-1),
            np.stack([c, zeros, x], axis=-1),
        ],
        axis=0,
    )
    rgb = np.take_along_axis(table, sector[None, ..., None], axis=0)[0]
    return (rgb + m[..., None]) * 255.0


def hsv_adjust(img, hue_shift=0.0, sat_scale=1.0, val_scale=1.0):
    """Rotate hue by ``hue_shift`` degrees and scale saturation and value.

    Saturation and value are clamped to [0, 1] after scaling.
    """
    img = check_image(img)
    check_positive(sat_scale, "sat_scale", strict=False)
    check_positive(val_scale, "val_scale", strict=False)
    hsv = rgb_to_hsv(img)
    hsv[..., 0] = (hsv[..., 0] + float(hue_shift)) % 360.0
    hsv[..., 1] = np.clip(hsv[..., 1] * sat_scale, 0.0, 1.0)
    hsv[..., 2] = np.clip(hsv[..., 2] * val_scale, 0.0, 1.0)
    return _to_uint8(hsv_to_rgb(hsv))


# ---------------------------------------------------------------------------
# file boundary


def load_image(path):
    """Decode a PNG or JPEG file into an RGB uint8 array."""
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    except FileNotFoundError as exc:
        raise DataIOError(f"image not found: {path}") from exc
    except (UnidentifiedImageError, OSError) as exc:
        raise DataIOError(f"cannot decode image {path}: {exc}") from exc


def save_image(img, path):
    """Write ``img`` as PNG atomically (temporary file, then rename)."""
    from PIL import Image

    img = check_image(img)
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        Image.fromarray(img).save(tmp, format="PNG")
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise DataIOError(f"cannot write image {path}: {exc}") from exc
