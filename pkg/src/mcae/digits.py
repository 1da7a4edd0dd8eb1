"""Handwritten-digit pipeline: 8x8 feature vectors to raster images,
learned class prototypes, and per-instance synthetic shapes."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import binary_fill_holes

from .congeal import congeal, sample_boundary_points
from .geometry import block_means
from .morphing import migrate_control_points
from .shapes import ControlPointSet, PrototypeSpec

IMAGE_SIZE = 32
BLOCK = 4          # 32x32 image -> 8x8 block means -> 64 features


def features_to_image(vec, threshold: float = 0.4) -> np.ndarray:
    """Upsample a 64-vector of [0, 1] intensities to a 32x32 binary image."""
    grid = np.asarray(vec, dtype=float).reshape(8, 8)
    return np.kron(grid, np.ones((BLOCK, BLOCK))) >= threshold


def image_to_features(image) -> np.ndarray:
    """8x8 block means of a 32x32 image, flattened to 64 values in [0, 1]."""
    return block_means(np.asarray(image, dtype=float), BLOCK)


def build_digit_prototype(images, label: str, n_points: int = 24):
    """Congeal one class's images and sample its boundary control points.

    Returns (PrototypeSpec, prototype mask, congeal result).
    """
    result = congeal(list(images))
    shape = sample_boundary_points(result.prototype, n_points)
    proto_mask = result.prototype >= 0.5
    return PrototypeSpec(label, shape), proto_mask, result


def prototype_mask(shape: ControlPointSet) -> np.ndarray:
    """Filled region enclosed by a prototype's rendered contour loop."""
    return binary_fill_holes(shape.render())


def digit_syn1_shape(image, proto: PrototypeSpec,
                     proto_mask: np.ndarray) -> ControlPointSet:
    """First-stage synthetic shape for one real digit image: migrate the
    prototype's control points onto the digit's boundary."""
    return migrate_control_points(np.asarray(image, dtype=bool), proto_mask,
                                  proto.shape)
