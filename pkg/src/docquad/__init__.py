"""Quadrilateral document detection toolkit: affine grid decoding, augmentation,
rectification, OCR fidelity scoring and a cross-validation harness."""

__version__ = "0.1.0"
