import colorsys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from docquad.exceptions import DataIOError, DegenerateQuad, InvalidParameter
from docquad.geometry import homography_from_quads, invert_homography
from docquad.raster import (
    bilinear_sample,
    gaussian_blur,
    gaussian_kernel,
    hsv_adjust,
    hsv_to_rgb,
    load_image,
    negate,
    new_image,
    rgb_to_hsv,
    save_image,
    warp_perspective,
)


def gradient_image(w=120, h=90):
    y, x = np.mgrid[0:h, 0:w]
    img = np.stack([x * 255 / (w - 1), y * 255 / (h - 1), (x + y) * 255 / (w + h - 2)], axis=-1)
    return np.rint(img).astype(np.uint8)


def naive_bilinear(img, x, y):
    """Direct weighted sum of the four neighbours."""
    x0, y0 = int(np.floor(x)), int(np.floor(y))
    total = np.zeros(3)
    for dy in (0, 1):
        for dx in (0, 1):
            xi, yi = min(x0 + dx, img.shape[1] - 1), min(y0 + dy, img.shape[0] - 1)
            wgt = (1 - abs(x - (x0 + dx))) * (1 - abs(y - (y0 + dy)))
            total += wgt * img[yi, xi]
    return total


# sampling


def test_bilinear_examples():
    img = gradient_image()
    assert bilinear_sample(img, 7, 5) == tuple(float(v) for v in img[5, 7])
    bw = np.array([[[0, 0, 0], [255, 255, 255]]], dtype=np.uint8)
    assert bilinear_sample(bw, 0.5, 0) == (127.5, 127.5, 127.5)
    assert bilinear_sample(img, -5, -5) == (0.0, 0.0, 0.0)
    assert bilinear_sample(img, -5, -5, fill=(1, 2, 3)) == (1.0, 2.0, 3.0)


@given(st.floats(0, 119), st.floats(0, 89))
def test_bilinear_matches_neighbour_weighting(x, y):
    img = gradient_image()
    np.testing.assert_allclose(bilinear_sample(img, x, y), naive_bilinear(img, x, y), atol=1e-9)


# warping


def test_identity_warp_is_exact_copy():
    img = gradient_image()
    out = warp_perspective(img, np.eye(3), img.shape[1], img.shape[0])
    assert out.dtype == np.uint8
    np.testing.assert_array_equal(out, img)


def test_scale_warp_reproduces_corners():
    img = np.zeros((10, 16, 3), dtype=np.uint8)
    colors = [(250, 0, 0), (0, 250, 0), (0, 0, 250), (250, 250, 0)]
    corners = [(0, 0), (15, 0), (15, 9), (0, 9)]
    for (x, y), c in zip(corners, colors):
        img[y, x] = c
    out = warp_perspective(img, np.diag([2.0, 2.0, 1.0]), 32, 20)
    for (x, y), c in zip(corners, colors):
        assert np.abs(out[2 * y, 2 * x].astype(int) - c).max() <= 1


def test_warp_round_trip_on_gradient():
    img = gradient_image(160, 120)
    src = np.array([[0, 0], [159, 0], [159, 119], [0, 119]], dtype=float)
    dst = np.array([[10, 6], [150, 14], [145, 112], [4, 100]], dtype=float)
    h = homography_from_quads(src, dst)
    there = warp_perspective(img, h, 160, 120)
    back = warp_perspective(there, invert_homography(h), 160, 120)
    # compare where the round trip stays inside the warped region
    mask = warp_perspective(np.full_like(img, 255), h, 160, 120)
    valid = warp_perspective(mask, invert_homography(h), 160, 120)[..., 0] == 255
    valid[:2], valid[-2:], valid[:, :2], valid[:, -2:] = False, False, False, False
    diff = np.abs(back.astype(int) - img.astype(int))[valid]
    assert valid.sum() > 0.7 * valid.size
    assert diff.mean() < 3


def test_warp_pixels_match_scalar_reference():
    img = gradient_image()
    h = homography_from_quads([[0, 0], [119, 0], [119, 89], [0, 89]], [[5, 3], [110, 8], [115, 80], [2, 85]])
    out = warp_perspective(img, h, 120, 90)
    inv = np.linalg.inv(h)
    r = np.random.default_rng(1)
    for _ in range(200):
        u, v = int(r.integers(0, 120)), int(r.integers(0, 90))
        p = inv @ [u, v, 1.0]
        ref = np.rint(bilinear_sample(img, p[0] / p[2], p[1] / p[2]))
        np.testing.assert_array_equal(out[v, u], ref)


def test_warp_background_and_fill():
    img = new_image(4, 4, (200, 100, 50))
    bg = new_image(8, 8, (1, 2, 3))
    out = warp_perspective(img, np.eye(3), 8, 8, background=bg)
    assert tuple(out[7, 7]) == (1, 2, 3) and tuple(out[0, 0]) == (200, 100, 50)
    out = warp_perspective(img, np.eye(3), 8, 8, fill=(9, 9, 9))
    assert tuple(out[7, 7]) == (9, 9, 9)


def test_warp_points_behind_camera_take_fill():
    img = new_image(20, 20, (255, 255, 255))
    h = -np.eye(3)
    out = warp_perspective(img, h, 20, 20)
    assert out.max() == 0


def test_warp_singular_raises():
    with pytest.raises(DegenerateQuad):
        warp_perspective(new_image(4, 4), np.zeros((3, 3)), 4, 4)
    with pytest.raises(DegenerateQuad):
        warp_perspective(new_image(4, 4), [[1, 2, 0], [2, 4, 0], [0, 0, 1]], 4, 4)


# negate


def test_negate_examples():
    assert negate(new_image(3, 3)).min() == 255
    img = gradient_image()
    np.testing.assert_array_equal(negate(negate(img)), img)
    px = np.array([[[10, 200, 55]]], dtype=np.uint8)
    assert tuple(negate(px)[0, 0]) == (245, 55, 200)


# blur


def test_blur_constant_image():
    img = new_image(30, 20, (90, 140, 33))
    assert np.abs(gaussian_blur(img, 2.5).astype(int) - img).max() <= 1


def test_blur_impulse_center_and_sum():
    img = new_image(41, 41)
    img[20, 20] = 255
    out = gaussian_blur(img, 1.0)
    k = gaussian_kernel(1.0)
    centre = k[len(k) // 2] ** 2 * 255
    assert abs(int(out[20, 20, 0]) - centre) <= 1
    assert gaussian_kernel(3.0).sum() == pytest.approx(1.0, abs=1e-12)
    # a bright block keeps 8-bit rounding small next to the total
    block = new_image(61, 61)
    block[26:35, 26:35] = 255
    total = block[..., 0].astype(float).sum()
    out = gaussian_blur(block, 2.0)
    assert abs(out[..., 0].astype(float).sum() - total) / total < 0.005


def test_blur_rejects_nonpositive_sigma():
    with pytest.raises(InvalidParameter):
        gaussian_blur(new_image(5, 5), 0)


# HSV


def test_hsv_identity_and_red_to_green():
    img = gradient_image()
    assert np.abs(hsv_adjust(img, 0, 1.0, 1.0).astype(int) - img).max() <= 1
    red = np.array([[[255, 0, 0]]], dtype=np.uint8)
    assert np.abs(hsv_adjust(red, 120).astype(int) - [0, 255, 0]).max() <= 1


def test_hsv_round_trip_exhaustive():
    levels = np.arange(16) * 17
    r, g, b = np.meshgrid(levels, levels, levels, indexing="ij")
    rgb = np.stack([r, g, b], axis=-1).reshape(-1, 3).astype(np.uint8)
    back = np.rint(hsv_to_rgb(rgb_to_hsv(rgb)))
    assert np.abs(back - rgb).max() <= 1


def test_rgb_to_hsv_matches_colorsys():
    r = np.random.default_rng(3)
    rgb = r.integers(0, 256, size=(500, 3))
    ours = rgb_to_hsv(rgb)
    for (pr, pg, pb), (h, s, v) in zip(rgb, ours):
        eh, es, ev = colorsys.rgb_to_hsv(pr / 255, pg / 255, pb / 255)
        assert s == pytest.approx(es, abs=1e-12) and v == pytest.approx(ev, abs=1e-12)
        if es > 0:
            assert min(abs(h - eh * 360), 360 - abs(h - eh * 360)) < 1e-9


def test_hsv_clamps_saturation_and_value():
    img = gradient_image()
    out = hsv_adjust(img, 0, 0.0, 1.0)
    assert (out.max(axis=-1).astype(int) - out.min(axis=-1)).max() <= 1


# file boundary


def test_png_round_trip(tmp_path):
    img = gradient_image()
    path = tmp_path / "x.png"
    save_image(img, path)
    np.testing.assert_array_equal(load_image(path), img)
    assert not list(tmp_path.glob("*.tmp*"))


def test_load_missing_image(tmp_path):
    with pytest.raises(DataIOError, match="nope.png"):
        load_image(tmp_path / "nope.png")


@given(st.integers(0, 2**31))
def test_corner_tracking_coherence(seed):
    from docquad.geometry import apply_homography

    r = np.random.default_rng(seed)
    img = new_image(80, 60, (20, 20, 20))
    colour = tuple(int(v) for v in r.integers(0, 256, 3))
    px, py = int(r.integers(10, 70)), int(r.integers(10, 50))
    img[py - 5 : py + 6, px - 5 : px + 6] = colour
    src = np.array([[0, 0], [79, 0], [79, 59], [0, 59]], dtype=float)
    dst = src * r.uniform(0.8, 1.3) + r.uniform(0, 15, 2) + r.uniform(-12, 12, (4, 2))
    h = homography_from_quads(src, dst)
    out = warp_perspective(img, h, 130, 100)
    x, y = apply_homography(h, (px, py))
    assert np.abs(out[int(round(y)), int(round(x))].astype(int) - colour).max() <= 2
