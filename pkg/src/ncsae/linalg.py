"""Dense float64 linear algebra, elementwise nonlinearities, and seeded RNG.

All matrices are 2-D C-contiguous float64 ndarrays. The RNG is numpy's
PCG64 behind an explicitly passed Generator, so every draw sequence is a
pure function of the seed.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array and reject non-finite entries."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={out.ndim}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    return out


def as_vector(a, name: str = "vector") -> np.ndarray:
    """Coerce to a 1-D float64 array and reject non-finite entries."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={out.ndim}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    return out


def check_unit_interval(x: np.ndarray, name: str = "X") -> None:
    """Raise if any entry lies outside [0, 1]."""
    lo = float(x.min()) if x.size else 0.0
    hi = float(x.max()) if x.size else 0.0
    if lo < 0.0 or hi > 1.0:
        raise ValueError(f"{name} entries must lie in [0, 1], got range [{lo}, {hi}]")


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with an explicit shape check."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return a @ b


def sigmoid(x) -> np.ndarray:
    """Elementwise logistic 1 / (1 + exp(-x)); saturates instead of overflowing."""
    return expit(np.asarray(x, dtype=np.float64))


def softmax_rows(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; each row sums to 1."""
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for the given seed."""
    return np.random.Generator(np.random.PCG64(seed))


def rng_uniform(rng: np.random.Generator, lo: float, hi: float,
                rows: int, cols: int) -> np.ndarray:
    """rows x cols matrix of i.i.d. uniform draws from [lo, hi)."""
    if not lo < hi:
        raise ValueError(f"rng_uniform requires lo < hi, got lo={lo}, hi={hi}")
    return rng.uniform(lo, hi, size=(rows, cols))
