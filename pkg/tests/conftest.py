"""Shared test helpers: finite-difference gradient checking and tiny fixtures."""

import numpy as np
import pytest

from ncsae import Hyperparams, init_ae_params, make_rng, rng_uniform

FD_STEP = 1e-5


def rel_err(a: float, b: float) -> float:
    """Scaled relative error with a unit floor, well defined near zero."""
    return abs(a - b) / max(1.0, abs(a), abs(b))


def central_diff(f, x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central finite differences of scalar f over every entry of x.

    Mutates a private copy entry by entry; f must not keep references to x.
    """
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    flat = x.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        up = f(x)
        flat[i] = orig - step
        down = f(x)
        flat[i] = orig
        gflat[i] = (up - down) / (2.0 * step)
    return grad


def max_rel_err(analytic: np.ndarray, numeric: np.ndarray) -> float:
    a = np.asarray(analytic).ravel()
    n = np.asarray(numeric).ravel()
    return max(rel_err(ai, ni) for ai, ni in zip(a, n))


@pytest.fixture
def default_hp() -> Hyperparams:
    return Hyperparams()


@pytest.fixture
def small_instance():
    """Seeded (params, x) pair on a 6-visible, 3-hidden, 4-row problem."""
    rng = make_rng(7)
    params = init_ae_params(6, 3, rng)
    x = rng_uniform(rng, 0.0, 1.0, 4, 6)
    return params, x
