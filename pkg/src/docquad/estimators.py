"""scikit-learn style wrappers around the functional API.

None of these estimators learn anything: ``fit`` only validates and records
the input, so they can sit inside a ``Pipeline`` or be cloned with
``sklearn.base.clone``. Parameters are plain constructor arguments, which
gives ``get_params``/``set_params`` for free.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .augment import AugmentConfig, Sample, augment_sample
from .detect import DecodeConfig, DetectionGrid, detect, encode_target
from .ocr_metric import NormalizeConfig, score_breakdown
from .rectify import RectifyConfig, rectify_document
from .validation import check_quad


class _Stateless(BaseEstimator):
    def fit(self, X=None, y=None):
        self.n_features_in_ = 0
        return self

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = False
        return tags


class GridDecoder(_Stateless):
    """Map detection grids to the single best quad.

    Args:
        conf_threshold: minimum objectness for a cell to be decoded.
        nms_iou: suppression threshold.
    """

    def __init__(self, conf_threshold=0.35, nms_iou=0.3):
        self.conf_threshold = conf_threshold
        self.nms_iou = nms_iou

    def _cfg(self):
        return DecodeConfig(self.conf_threshold, self.nms_iou)

    def predict(self, X):
        """Return a list with one (4, 2) quad, or ``None``, per grid."""
        cfg = self._cfg()
        out = []
        for grid in X:
            det = detect(grid, cfg)
            out.append(None if det is None else det.quad)
        return out

    def predict_confidence(self, X):
        cfg = self._cfg()
        return np.array([getattr(detect(g, cfg), "confidence", 0.0) for g in X])


class TargetEncoder(_Stateless, TransformerMixin):
    """Turn ground-truth quads into training grids."""

    def __init__(self, rows=30, cols=40, stride=16, alpha=4.0):
        self.rows = rows
        self.cols = cols
        self.stride = stride
        self.alpha = alpha

    def transform(self, X) -> list[DetectionGrid]:
        return [encode_target(check_quad(q), self.rows, self.cols, self.stride, self.alpha) for q in X]


class DocumentRectifier(_Stateless, TransformerMixin):
    """Rectify ``(image, quad)`` pairs onto upright rectangles."""

    def __init__(self, aspect=1.5, target_width=600):
        self.aspect = aspect
        self.target_width = target_width

    def transform(self, X):
        cfg = RectifyConfig(self.aspect, self.target_width)
        return [rectify_document(img, quad, cfg) for img, quad in X]


class Augmenter(_Stateless, TransformerMixin):
    """Random crop, 3-D rotation and photometric jitter of ``(image, quad)`` pairs.

    ``random_state`` seeds a single PCG64 stream that is consumed across the
    whole call, so two transforms with the same seed give identical output.
    """

    def __init__(self, sigma=55.0, photometric=True, out_size=256, random_state=None):
        self.sigma = sigma
        self.photometric = photometric
        self.out_size = out_size
        self.random_state = random_state

    def transform(self, X):
        cfg = AugmentConfig(
            sigma=self.sigma,
            photometric_enabled=self.photometric,
            out_w=self.out_size,
            out_h=self.out_size,
        )
        rng = np.random.Generator(np.random.PCG64(self.random_state))
        out = []
        for img, quad in X:
            s = augment_sample(Sample(img, quad), rng, cfg)
            out.append((s.image, s.quad))
        return out


class OcrScorer(_Stateless):
    """OCR fidelity of predicted entity texts against ground truth."""

    def __init__(self, collapse_whitespace=True, casefold=False, compose=True):
        self.collapse_whitespace = collapse_whitespace
        self.casefold = casefold
        self.compose = compose

    def _norm(self):
        return NormalizeConfig(self.collapse_whitespace, self.casefold, self.compose)

    def score(self, X, y):
        """Mean per-document score; ``X`` holds predicted texts, ``y`` ground truth."""
        scores = [score_breakdown(gt, pd, self._norm())[0] for pd, gt in zip(X, y)]
        return float(np.mean(scores)) if scores else 1.0
