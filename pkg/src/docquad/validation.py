"""Input validation helpers shared by the functional API and the estimators."""

import numbers

import numpy as np

from .exceptions import InvalidParameter, InvalidPolygon, OutOfRange


def check_points(points, n=None, name="points"):
    """Return ``points`` as a finite float64 array of shape (N, 2).

    A single point of shape (2,) is rejected; use :func:`check_point`.
    """
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidPolygon(f"{name} must have shape (N, 2), got {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise InvalidPolygon(f"{name} must have {n} vertices, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidPolygon(f"{name} contains non-finite coordinates")
    return arr


def check_point(point, name="point"):
    arr = np.asarray(point, dtype=np.float64)
    if arr.shape != (2,) or not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"{name} must be a finite (x, y) pair")
    return arr


def check_quad(quad, name="quad"):
    """Return ``quad`` as a finite (4, 2) float64 array."""
    return check_points(quad, n=4, name=name)


def check_homography(h, name="homography"):
    arr = np.asarray(h, dtype=np.float64)
    if arr.shape != (3, 3) or not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"{name} must be a finite 3x3 matrix")
    return arr


def check_image(img, name="image"):
    """Return ``img`` as a C-contiguous uint8 array of shape (H, W, 3).

    Grayscale (H, W) input is broadcast to three channels and RGBA input is
    stripped of its alpha channel; anything else is rejected.
    """
    arr = np.asarray(img)
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    elif arr.ndim == 3 and arr.shape[2] == 4:
        arr = arr[:, :, :3]
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidParameter(f"{name} must have shape (H, W, 3), got {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidParameter(f"{name} must be at least 1x1")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.number):
            raise InvalidParameter(f"{name} must be numeric")
        if np.any(arr < 0) or np.any(arr > 255):
            raise InvalidParameter(f"{name} values must lie in [0, 255]")
        arr = np.rint(arr).astype(np.uint8)
    return np.ascontiguousarray(arr)


def check_probability(value, name):
    if not isinstance(value, numbers.Real) or not 0.0 <= value <= 1.0:
        raise OutOfRange(f"{name} must be a probability in [0, 1], got {value!r}")
    return float(value)


def check_range(pair, name, lower=None):
    lo, hi = (float(v) for v in pair)
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
        raise InvalidParameter(f"{name} must be an ordered (low, high) pair, got {pair!r}")
    if lower is not None and lo < lower:
        raise InvalidParameter(f"{name} must not go below {lower}, got {pair!r}")
    return lo, hi


def check_positive(value, name, strict=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise InvalidParameter(f"{name} must be a finite number, got {value!r}")
    if value < 0 or (strict and value == 0):
        bound = "> 0" if strict else ">= 0"
        raise InvalidParameter(f"{name} must be {bound}, got {value!r}")
    return value


def check_rng(rng):
    """Turn ``None``, an int seed or a Generator into a numpy Generator.

    Seeds go through :class:`numpy.random.PCG64`, whose output stream is the
    same on every platform. Objects that already expose ``random()`` are passed
    through untouched, which lets tests inject scripted draws.
    """
    if rng is None:
        raise InvalidParameter("an explicit seed or generator is required")
    if isinstance(rng, numbers.Integral):
        return np.random.Generator(np.random.PCG64(int(rng)))
    if hasattr(rng, "random"):
        return rng
    raise InvalidParameter(f"cannot build a random generator from {rng!r}")


def sample_rng(seed, index):
    """Independent generator for item ``index`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    return np.random.Generator(np.random.PCG64(ss))
