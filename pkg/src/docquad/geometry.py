"""Planar geometry on quadrilaterals.

Conventions: image coordinates with x to the right and y down. A quad is a
(4, 2) float array ordered top-left, top-right, bottom-right, bottom-left,
which gives a positive shoelace area in this frame.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .exceptions import (
    DegenerateFit,
    DegenerateQuad,
    InvalidClipRegion,
    InvalidPolygon,
    PointAtInfinity,
)
from .validation import check_homography, check_point, check_points, check_positive, check_quad

#: Canonical square used by the affine encoding, centred on the origin.
CANONICAL_SQUARE = np.array(
    [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]], dtype=np.float64
)

_REL_DET_EPS = 1e-10
_W_EPS = 1e-12
_MAX_COND = 1e12


class AffineParams(NamedTuple):
    """Six affine parameters: linear part ``[[a1, a2], [a4, a5]]``, shift ``(a3, a6)``."""

    a1: float
    a2: float
    a3: float
    a4: float
    a5: float
    a6: float

    @property
    def matrix(self):
        return np.array([[self.a1, self.a2, self.a3], [self.a4, self.a5, self.a6], [0.0, 0.0, 1.0]])

    def apply(self, points):
        p = np.asarray(points, dtype=np.float64)
        return p @ self.matrix[:2, :2].T + self.matrix[:2, 2]


class RotationAngles(NamedTuple):
    """Roll, pitch and yaw in degrees."""

    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0


# ---------------------------------------------------------------------------
# areas and polygon tests


def _as_tuples(poly):
    return [(float(x), float(y)) for x, y in poly]


def _signed_area(pts):
    n = len(pts)
    s = 0.0
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def signed_area(poly):
    """Shoelace area, positive for TL, TR, BR, BL order in y-down coordinates."""
    pts = check_points(poly, name="polygon")
    if len(pts) < 3:
        raise InvalidPolygon("a polygon needs at least 3 vertices")
    return _signed_area(_as_tuples(pts))


def polygon_area(poly):
    """Absolute shoelace area of a simple polygon (0 for degenerate input)."""
    return abs(signed_area(poly))


def _segments_cross(p1, p2, p3, p4):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    return d1 * d2 < 0 and d3 * d4 < 0


def is_simple_quad(quad):
    """True when the two pairs of opposite edges do not cross."""
    q = _as_tuples(check_quad(quad))
    return not (
        _segments_cross(q[0], q[1], q[2], q[3]) or _segments_cross(q[1], q[2], q[3], q[0])
    )


def is_convex(poly):
    pts = _as_tuples(check_points(poly, name="polygon"))
    return _is_convex(pts)


def _is_convex(pts):
    n = len(pts)
    sign = 0
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        cx, cy = pts[(i + 2) % n]
        cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
        if cross > 0:
            if sign < 0:
                return False
            sign = 1
        elif cross < 0:
            if sign > 0:
                return False
            sign = -1
    return True


def validate_quad(quad, name="quad"):
    """Check every quad invariant and return the quad as an array.

    Raises :class:`InvalidPolygon` for non-finite, self-intersecting or
    non-positively oriented input.
    """
    q = check_quad(quad, name=name)
    if not is_simple_quad(q):
        raise InvalidPolygon(f"{name} is self-intersecting")
    if _signed_area(_as_tuples(q)) <= 0:
        raise InvalidPolygon(f"{name} must have positive signed area (TL, TR, BR, BL order)")
    return q


def order_quad(quad):
    """Reorder four vertices into TL, TR, BR, BL with positive signed area.

    The winding is flipped when needed and the vertex with the smallest
    ``x + y`` becomes the first one (ties go to the smaller ``x - y``).
    """
    q = check_quad(quad)
    if _signed_area(_as_tuples(q)) < 0:
        q = q[::-1]
    keys = [(x + y, x - y) for x, y in q]
    start = min(range(4), key=lambda i: keys[i])
    return np.roll(q, -start, axis=0).copy()


def point_in_polygon(point, poly):
    """Even-odd point-in-polygon test."""
    x, y = (float(v) for v in point)
    pts = _as_tuples(poly)
    inside = False
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if x < xc:
                inside = not inside
    return inside


# ---------------------------------------------------------------------------
# clipping and IoU


def _clip(subject, clip):
    """Sutherland-Hodgman on tuple lists; ``clip`` convex and positively wound."""
    output = subject
    n = len(clip)
    for k in range(n):
        if not output:
            break
        cx0, cy0 = clip[k]
        cx1, cy1 = clip[(k + 1) % n]
        ex, ey = cx1 - cx0, cy1 - cy0
        inputs = output
        output = []
        sx, sy = inputs[-1]
        s_side = ex * (sy - cy0) - ey * (sx - cx0)
        for px, py in inputs:
            p_side = ex * (py - cy0) - ey * (px - cx0)
            if p_side >= 0:
                if s_side < 0:
                    t = s_side / (s_side - p_side)
                    output.append((sx + t * (px - sx), sy + t * (py - sy)))
                output.append((px, py))
            elif s_side >= 0:
                if s_side > 0:
                    t = s_side / (s_side - p_side)
                    output.append((sx + t * (px - sx), sy + t * (py - sy)))
            sx, sy, s_side = px, py, p_side
    return output


def convex_clip(subject, clip):
    """Intersect ``subject`` with the convex polygon ``clip``.

    Returns the intersection as an (M, 2) array, empty when the polygons do
    not overlap. Either winding is accepted for ``clip``.
    """
    subj = _as_tuples(check_points(subject, name="subject"))
    clp = _as_tuples(check_points(clip, name="clip"))
    if len(clp) < 3:
        raise InvalidClipRegion("clip polygon needs at least 3 vertices")
    if not _is_convex(clp):
        raise InvalidClipRegion("clip polygon is not convex")
    area = _signed_area(clp)
    if area == 0:
        return np.empty((0, 2))
    if area < 0:
        clp = clp[::-1]
    out = _clip(subj, clp)
    return np.array(out, dtype=np.float64).reshape(-1, 2)


def _triangles(quad):
    """Split a simple quad into two triangles along an interior diagonal."""
    for i in range(4):
        a, b, c = quad[i - 1], quad[i], quad[(i + 1) % 4]
        if (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) < 0:
            # reflex vertex i: the diagonal through it stays inside
            j = (i + 2) % 4
            return [[quad[i], quad[(i + 1) % 4], quad[j]], [quad[j], quad[(j + 1) % 4], quad[i]]]
    return [[quad[0], quad[1], quad[2]], [quad[2], quad[3], quad[0]]]


def _positive(q):
    return q if _signed_area(q) >= 0 else q[::-1]


def _intersection_area(a, b):
    if _is_convex(b):
        return abs(_signed_area(_clip(a, b))) if a else 0.0
    if _is_convex(a):
        return abs(_signed_area(_clip(b, a)))
    total = 0.0
    for tri in _triangles(b):
        poly = _clip(a, _positive(tri))
        if len(poly) >= 3:
            total += abs(_signed_area(poly))
    return total


def _simple(q):
    return not (_segments_cross(q[0], q[1], q[2], q[3]) or _segments_cross(q[1], q[2], q[3], q[0]))


def quad_iou(a, b):
    """Intersection over union of two quads, in [0, 1].

    Degenerate (zero-area) or self-intersecting quads give 0.
    """
    qa = _as_tuples(check_quad(a, name="a"))
    qb = _as_tuples(check_quad(b, name="b"))
    if not (_simple(qa) and _simple(qb)):
        return 0.0
    qa, qb = _positive(qa), _positive(qb)
    area_a = _signed_area(qa)
    area_b = _signed_area(qb)
    if area_a <= 0.0 or area_b <= 0.0:
        return 0.0
    if qa == qb:
        return 1.0
    # disjoint bounding boxes
    if (
        max(p[0] for p in qa) <= min(p[0] for p in qb)
        or max(p[0] for p in qb) <= min(p[0] for p in qa)
        or max(p[1] for p in qa) <= min(p[1] for p in qb)
        or max(p[1] for p in qb) <= min(p[1] for p in qa)
    ):
        return 0.0
    inter = _intersection_area(qa, qb)
    union = area_a + area_b - inter
    if union <= 0.0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


def box_iou(a, b):
    """IoU of two axis-aligned boxes ``(x0, y0, x1, y1)``."""
    ax0, ay0, ax1, ay1 = (float(v) for v in a)
    bx0, by0, bx1, by1 = (float(v) for v in b)
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union if union > 0 else 0.0


# ---------------------------------------------------------------------------
# affine fit


def fit_affine(src, dst):
    """Least-squares affine map taking ``src`` vertices onto ``dst`` vertices.

    Solves the normal equations of the 8-equation, 6-unknown system. The fit
    is exact when ``dst`` is an affine image of ``src`` (e.g. the canonical
    square onto a parallelogram).

    Raises:
        DegenerateFit: if the source points do not span the plane.
    """
    s = check_points(src, name="src")
    d = check_points(dst, n=len(s), name="dst")
    design = np.column_stack([s, np.ones(len(s))])
    gram = design.T @ design
    scale = np.abs(gram).max()
    if scale == 0 or abs(np.linalg.det(gram)) <= _REL_DET_EPS * scale**3:
        raise DegenerateFit("source points are collinear or coincident")
    rhs = design.T @ d
    try:
        sol = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateFit(str(exc)) from exc
    (a1, a4), (a2, a5), (a3, a6) = sol
    return AffineParams(float(a1), float(a2), float(a3), float(a4), float(a5), float(a6))


# ---------------------------------------------------------------------------
# homographies


def _normalizer(pts):
    c = pts.mean(axis=0)
    d = np.sqrt(((pts - c) ** 2).sum(axis=1)).mean()
    if d == 0:
        raise DegenerateQuad("all points coincide")
    s = math.sqrt(2.0) / d
    return np.array([[s, 0.0, -s * c[0]], [0.0, s, -s * c[1]], [0.0, 0.0, 1.0]])


def _has_collinear_triple(pts):
    for i in range(4):
        a, b, c = pts[i], pts[(i + 1) % 4], pts[(i + 2) % 4]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cross) <= _REL_DET_EPS:
            return True
    return False


def homography_from_quads(src, dst):
    """Exact projective map sending four ``src`` points onto four ``dst`` points.

    Both point sets are conditioned (centroid shift, mean distance sqrt(2))
    before the 8x8 system with ``h33 = 1`` is solved by LU with partial
    pivoting. The result is rescaled so that ``h33 == 1``.

    Raises:
        DegenerateQuad: if three points of either set are collinear or the
            system is singular.
    """
    s = check_quad(src, name="src")
    d = check_quad(dst, name="dst")
    ts, td = _normalizer(s), _normalizer(d)
    sn = s @ ts[:2, :2].T + ts[:2, 2]
    dn = d @ td[:2, :2].T + td[:2, 2]
    if _has_collinear_triple(sn) or _has_collinear_triple(dn):
        raise DegenerateQuad("three of the four points are collinear")
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for k, ((x, y), (u, v)) in enumerate(zip(sn, dn)):
        a[2 * k] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]
        a[2 * k + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]
        b[2 * k], b[2 * k + 1] = u, v
    rel = abs(np.linalg.det(a)) / np.prod(np.linalg.norm(a, axis=1))
    if not rel > _REL_DET_EPS:
        raise DegenerateQuad("point configuration gives a singular system")
    h = np.append(np.linalg.solve(a, b), 1.0).reshape(3, 3)
    h = np.linalg.solve(td, h @ ts)
    if abs(h[2, 2]) <= _W_EPS:
        raise DegenerateQuad("homography maps the origin to infinity")
    return h / h[2, 2]


def apply_homography(h, points):
    """Map one point ``(x, y)`` or an (N, 2) array of points through ``h``.

    Raises:
        PointAtInfinity: if any projective denominator is within 1e-12 of 0.
    """
    m = check_homography(h)
    p = np.asarray(points, dtype=np.float64)
    single = p.ndim == 1
    if single:
        p = check_point(p)[None, :]
    else:
        p = check_points(p)
    w = p[:, 0] * m[2, 0] + p[:, 1] * m[2, 1] + m[2, 2]
    if np.any(np.abs(w) <= _W_EPS):
        raise PointAtInfinity("point maps to infinity under the homography")
    x = (p[:, 0] * m[0, 0] + p[:, 1] * m[0, 1] + m[0, 2]) / w
    y = (p[:, 0] * m[1, 0] + p[:, 1] * m[1, 1] + m[1, 2]) / w
    out = np.column_stack([x, y])
    return out[0] if single else out


def is_singular(h):
    """True when ``h`` is numerically singular (condition number above 1e12)."""
    m = check_homography(h)
    if not np.any(m):
        return True
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(m)
    return not (np.isfinite(cond) and cond <= _MAX_COND)


def invert_homography(h):
    """Inverse of ``h``, rescaled to ``h33 == 1`` when that entry is usable."""
    m = check_homography(h)
    if is_singular(m):
        raise DegenerateQuad("homography is singular")
    inv = np.linalg.inv(m)
    if abs(inv[2, 2]) > _W_EPS:
        inv = inv / inv[2, 2]
    return inv


def rotation_matrix(angles):
    """3-D rotation ``Rz(roll) @ Rx(pitch) @ Ry(yaw)`` from angles in degrees."""
    roll, pitch, yaw = (math.radians(float(v)) for v in angles)
    cz, sz = math.cos(roll), math.sin(roll)
    cx, sx = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    rz = np.array([[cz, -sz, 0.0], [sz, cz, 0.0], [0.0, 0.0, 1.0]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cx, -sx], [0.0, sx, cx]])
    ry = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])
    return rz @ rx @ ry


def rotation_homography(angles, center, focal):
    """Homography of a planar image tilted in 3-D about its own centre.

    The image plane sits at depth ``focal`` in front of a pinhole camera with
    principal point ``center``. It is rotated by ``rotation_matrix(angles)``
    about the point where the optical axis pierces it and then reprojected,
    giving ``K [r1 r2 e3] K^-1``. Roll alone is an in-plane rotation about
    ``center``; pitch and yaw foreshorten while leaving ``center`` fixed.

    Args:
        angles: ``RotationAngles`` or any ``(roll, pitch, yaw)`` in degrees.
        center: principal point ``(cx, cy)`` in pixels.
        focal: focal length in pixels.
    """
    cx, cy = check_point(center, name="center")
    f = float(check_positive(focal, "focal"))
    k = np.array([[f, 0.0, cx], [0.0, f, cy], [0.0, 0.0, 1.0]])
    k_inv = np.array([[1.0 / f, 0.0, -cx / f], [0.0, 1.0 / f, -cy / f], [0.0, 0.0, 1.0]])
    m = rotation_matrix(angles)
    m[:, 2] = (0.0, 0.0, 1.0)
    h = k @ m @ k_inv
    # positive rescale only: the sign of w marks points in front of the camera
    return h / h[2, 2] if h[2, 2] > _W_EPS else h


def orient_homography(h, points):
    """Return ``h`` or ``-h`` so the projective denominator is positive at ``points``' centroid.

    Warps treat source points with a positive denominator as visible, so a
    homography estimated up to sign is flipped here before warping.
    """
    m = check_homography(h)
    cx, cy = np.asarray(points, dtype=np.float64).mean(axis=0)
    w = m[2, 0] * cx + m[2, 1] * cy + m[2, 2]
    return -m if w < 0 else m


def similarity(scale, tx, ty):
    return np.array([[scale, 0.0, tx], [0.0, scale, ty], [0.0, 0.0, 1.0]])


def quad_bounds(quad):
    q = np.asarray(quad, dtype=np.float64)
    return q[:, 0].min(), q[:, 1].min(), q[:, 0].max(), q[:, 1].max()
