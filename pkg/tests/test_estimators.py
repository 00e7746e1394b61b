import numpy as np
import pytest
from sklearn.base import clone
from sklearn.utils import get_tags

from docquad.estimators import Augmenter, DocumentRectifier, GridDecoder, OcrScorer, TargetEncoder
from docquad.geometry import quad_iou
from docquad.harness.fixtures import FixtureConfig, generate_fixture
from docquad.validation import sample_rng

QUAD = np.array([[40.0, 30.0], [200.0, 40.0], [190.0, 150.0], [35.0, 140.0]])


def test_params_and_clone():
    dec = GridDecoder(conf_threshold=0.5)
    assert dec.get_params() == {"conf_threshold": 0.5, "nms_iou": 0.3}
    c = clone(dec.set_params(nms_iou=0.4))
    assert c.get_params() == {"conf_threshold": 0.5, "nms_iou": 0.4}
    assert get_tags(dec).requires_fit is False


def test_encoder_decoder_round_trip():
    para = QUAD.copy()
    para[2] = para[1] + para[3] - para[0]
    grids = TargetEncoder(rows=12, cols=16).fit_transform([para])
    (out,) = GridDecoder().fit(grids).predict(grids)
    assert quad_iou(out, para) >= 0.99
    assert GridDecoder().predict_confidence(grids)[0] == 1.0


def test_rectifier_and_augmenter():
    scene = generate_fixture(sample_rng(0, 0), FixtureConfig(mode="affine"))
    (rect,) = DocumentRectifier(target_width=150).transform([(scene.image, scene.quad)])
    assert rect.shape == (100, 150, 3)
    aug = Augmenter(sigma=30, out_size=128, random_state=3)
    a = aug.transform([(scene.image, scene.quad)] * 2)
    b = clone(aug).transform([(scene.image, scene.quad)] * 2)
    for (ia, qa), (ib, qb) in zip(a, b):
        assert ia.shape == (128, 128, 3)
        np.testing.assert_array_equal(ia, ib)
        np.testing.assert_array_equal(qa, qb)


def test_ocr_scorer():
    s = OcrScorer()
    assert s.score([["ABXD", "XY"]], [["ABCD", "XY"]]) == pytest.approx(1 - 1 / 6)
    assert OcrScorer(casefold=True).score([["abc"]], [["ABC"]]) == 1.0
