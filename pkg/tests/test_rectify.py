import numpy as np
import pytest

from docquad.exceptions import DegenerateQuad, InvalidParameter
from docquad.geometry import apply_homography
from docquad.harness.fixtures import CORNER_COLORS, FixtureConfig, generate_fixture
from docquad.rectify import RectifyConfig, rectification_homography, rectify_document
from docquad.validation import sample_rng


def test_config_size_and_corners():
    cfg = RectifyConfig(aspect=1.5, target_width=600)
    assert cfg.size == (600, 400)
    np.testing.assert_array_equal(cfg.corners(), [[0, 0], [599, 0], [599, 399], [0, 399]])
    assert RectifyConfig(aspect=1.586, target_width=500).size == (500, 315)
    with pytest.raises(InvalidParameter):
        RectifyConfig(aspect=0)


def test_rectify_target_rectangle_is_copy():
    r = np.random.default_rng(0)
    img = r.integers(0, 256, size=(300, 400, 3), dtype=np.uint8)
    cfg = RectifyConfig(aspect=1.5, target_width=300)
    out = rectify_document(img, cfg.corners(), cfg)
    assert out.shape == (200, 300, 3)
    assert np.abs(out.astype(int) - img[:200, :300]).max() <= 1


def test_rectify_maps_quad_to_corners():
    quad = np.array([[50.0, 40.0], [500.0, 70.0], [480.0, 390.0], [30.0, 350.0]])
    cfg = RectifyConfig()
    h = rectification_homography(quad, cfg)
    np.testing.assert_allclose(apply_homography(h, quad), cfg.corners(), atol=1e-6)
    assert h[2, 0] * quad[:, 0].mean() + h[2, 1] * quad[:, 1].mean() + h[2, 2] > 0


@pytest.mark.parametrize("mode", ["projective", "affine"])
def test_rectify_fixture_corner_colours(mode):
    cfg = FixtureConfig(mode=mode)
    rcfg = RectifyConfig(aspect=cfg.aspect, target_width=cfg.doc_width)
    for i in range(8):
        scene = generate_fixture(sample_rng(7, i), cfg)
        out = rectify_document(scene.image, scene.quad, rcfg)
        assert out.shape[:2] == (cfg.doc_height, cfg.doc_width)
        for (x, y), colour in zip(np.rint(scene.corner_points()).astype(int), CORNER_COLORS):
            assert np.abs(out[y, x].astype(int) - colour).max() <= 2


def test_rectify_reversed_winding_flips_image():
    r = np.random.default_rng(1)
    img = r.integers(0, 256, size=(200, 300, 3), dtype=np.uint8)
    cfg = RectifyConfig(aspect=1.5, target_width=300)
    mirrored = cfg.corners()[[1, 0, 3, 2]]
    out = rectify_document(img, mirrored, cfg)
    assert np.abs(out.astype(int) - img[:, ::-1]).max() <= 1


def test_rectify_degenerate_quads():
    img = np.zeros((50, 50, 3), dtype=np.uint8)
    with pytest.raises(DegenerateQuad):
        rectify_document(img, [[0, 0], [10, 0], [20, 0], [0, 10]])
    with pytest.raises(DegenerateQuad):
        rectify_document(img, [[0, 0], [10, 10], [10, 0], [0, 10]])


def test_rectify_undoes_known_distortion():
    from docquad.harness.fixtures import render_document
    from docquad.geometry import homography_from_quads
    from docquad.raster import warp_perspective

    cfg = FixtureConfig()
    doc, _ = render_document(np.random.default_rng(4), cfg)
    h_doc, w_doc = doc.shape[:2]
    corners = np.array([[0, 0], [w_doc - 1, 0], [w_doc - 1, h_doc - 1], [0, h_doc - 1]], dtype=float)
    dst = np.array([[150.0, 80.0], [520.0, 120.0], [560.0, 400.0], [110.0, 350.0]])
    h = homography_from_quads(corners, dst)
    scene = warp_perspective(doc, h, 640, 480)
    out = rectify_document(scene, apply_homography(h, corners), RectifyConfig(cfg.aspect, w_doc))
    interior = (slice(3, -3), slice(3, -3))
    assert np.abs(out[interior].astype(int) - doc[interior]).mean() < 5


@pytest.mark.parametrize("quad", [[[0, 0], [10, 0], [10, 10], [0, 10]], [[5, 5], [400, 30], [380, 300], [20, 260]]])
def test_output_size_depends_only_on_config(quad):
    cfg = RectifyConfig(aspect=1.25, target_width=100)
    out = rectify_document(np.zeros((320, 420, 3), np.uint8), quad, cfg)
    assert out.shape == (80, 100, 3)
