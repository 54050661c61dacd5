"""Synthetic piecewise-affine test images and training pairs."""

from __future__ import annotations

import numpy as np

from .core import ScalarImage, TrainingPair
from .io import NoiseSpec, add_gaussian_noise


def piecewise_affine(height: int = 64, width: int = 64) -> ScalarImage:
    """Affine background with a sloped rectangle, a flat disk and a ramped wedge.

    Coordinates are normalized to [0, 1) so the picture looks the same at any
    size; intensities stay inside [0, 255].
    """
    x1, x2 = np.meshgrid(np.arange(height) / height, np.arange(width) / width, indexing="ij")
    img = 40.0 + 60.0 * x1 + 40.0 * x2
    rect = (x1 > 0.15) & (x1 < 0.55) & (x2 > 0.1) & (x2 < 0.45)
    img[rect] = 200.0 - 120.0 * x2[rect] + 30.0 * x1[rect]
    disk = (x1 - 0.7) ** 2 + (x2 - 0.7) ** 2 < 0.18**2
    img[disk] = 230.0
    wedge = (x2 > 0.55) & (x1 < 0.45) & (x1 > 0.9 - x2)
    img[wedge] = 20.0 + 150.0 * (x1[wedge] + x2[wedge] - 0.9)
    return ScalarImage(img)


def synthetic_pair(height: int = 64, width: int = 64, sigma: float = 25.0,
                   seed: int = 20240607) -> TrainingPair:
    """Piecewise-affine clean image and its seeded Gaussian-noise version."""
    clean = piecewise_affine(height, width)
    return TrainingPair(clean, add_gaussian_noise(clean, NoiseSpec(sigma, seed)))
