"""Procedurally drawn digit images for demos and self-contained experiments.

Each sample is a 28x28 grayscale image of a stroke-drawn digit (1, 2, or 6)
with seeded jitter: rotation, translation, stroke thickness, intensity, and
background speckle. Labels carry the literal digit values so the corpus
slots into the same subset-and-reindex pipeline as file-loaded digit data.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .linalg import make_rng

IMG_SIDE = 28


def _segment(p0, p1, n=24):
    t = np.linspace(0.0, 1.0, n)[:, None]
    return (1 - t) * np.asarray(p0, dtype=float) + t * np.asarray(p1, dtype=float)


def _arc(center, radius, theta0, theta1, n=32):
    theta = np.linspace(theta0, theta1, n)
    cy, cx = center
    return np.stack([cy - radius * np.sin(theta), cx + radius * np.cos(theta)], axis=1)


def _digit_path(digit: int) -> np.ndarray:
    """Pen path for a digit as (row, col) points on the 28x28 canvas."""
    if digit == 1:
        return np.vstack([_segment((8.5, 10.5), (4.5, 14.0), 10),
                          _segment((4.5, 14.0), (23.5, 14.0), 36)])
    if digit == 2:
        return np.vstack([_arc((9.0, 14.0), 5.0, np.pi * 0.85, -np.pi * 0.10, 28),
                          _segment((11.5, 18.3), (23.0, 8.5), 26),
                          _segment((23.0, 8.5), (23.0, 19.5), 22)])
    if digit == 6:
        return np.vstack([_arc((9.5, 16.0), 7.0, np.pi * 0.55, np.pi * 1.05, 22),
                          _segment((12.4, 9.7), (18.0, 9.3), 12),
                          _arc((18.5, 13.5), 4.4, 0.0, 2.0 * np.pi, 40)])
    raise ValueError(f"no stroke template for digit {digit}")


def _render(points: np.ndarray, radius: float) -> np.ndarray:
    rr, cc = np.mgrid[0:IMG_SIDE, 0:IMG_SIDE]
    d2 = (rr[..., None] - points[:, 0]) ** 2 + (cc[..., None] - points[:, 1]) ** 2
    d = np.sqrt(d2.min(axis=-1))
    return np.clip(radius + 0.6 - d, 0.0, 1.0)


def make_digit_corpus(n_per_class: int, seed: int = 0,
                      digits: tuple[int, ...] = (1, 2, 6),
                      noise: float = 0.12) -> Dataset:
    """Deterministic corpus of jittered stroke digits, n_per_class each.

    Rows interleave the classes (digit cycle) so any prefix stays roughly
    balanced.
    """
    if n_per_class < 1:
        raise ValueError(f"n_per_class must be >= 1, got {n_per_class}")
    rng = make_rng(seed)
    center = (IMG_SIDE - 1) / 2.0
    images = np.empty((n_per_class * len(digits), IMG_SIDE * IMG_SIDE))
    labels = np.empty(n_per_class * len(digits), dtype=np.int64)
    row = 0
    for _ in range(n_per_class):
        for digit in digits:
            path = _digit_path(digit)
            angle = rng.uniform(-0.18, 0.18)
            scale = rng.uniform(0.9, 1.05)
            shift = rng.uniform(-2.2, 2.2, size=2)
            c, s = np.cos(angle), np.sin(angle)
            rel = (path - center) * scale
            rotated = rel @ np.array([[c, -s], [s, c]]) + center + shift
            img = _render(rotated, radius=rng.uniform(0.9, 1.5))
            img *= rng.uniform(0.75, 1.0)
            img += rng.uniform(0.0, noise, size=img.shape)
            images[row] = np.clip(img, 0.0, 1.0).ravel()
            labels[row] = digit
            row += 1
    return Dataset(x=images, labels=labels,
                   class_names=[str(d) for d in digits],
                   image_shape=(IMG_SIDE, IMG_SIDE))
