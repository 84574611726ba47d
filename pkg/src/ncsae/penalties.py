"""Nonnegativity decay penalty: smoothed L1 plus squared L2 on negative weights.

The penalty is zero for w >= 0. For w < 0 it is
alpha1 * smoothed_l1(w, kappa) + (alpha2 / 2) * w**2, where smoothed_l1
replaces |w| by a quadratic below the knee kappa so the gradient is
continuous at the origin. Array variants use the same floating-point
expressions as the scalar ones and agree with them bit for bit.
"""

from __future__ import annotations

import numpy as np

from .params import Hyperparams


def _check_kappa(kappa: float) -> None:
    if kappa <= 0.0:
        raise ValueError(f"kappa must be > 0, got {kappa}")


def smoothed_l1(w: float, kappa: float) -> float:
    """|w| above the knee, w**2/(2*kappa) + kappa/2 at or below it."""
    _check_kappa(kappa)
    a = abs(w)
    if a > kappa:
        return a
    return (w * w) / (2.0 * kappa) + kappa / 2.0


def smoothed_l1_grad(w: float, kappa: float) -> float:
    """sign(w) above the knee, w/kappa at or below it."""
    _check_kappa(kappa)
    if abs(w) > kappa:
        return 1.0 if w > 0 else -1.0
    return w / kappa


def penalty(w: float, hp: Hyperparams) -> float:
    """Decay penalty for one weight; zero unless w < 0."""
    if w >= 0.0:
        return 0.0
    return hp.alpha1 * smoothed_l1(w, hp.kappa) + (0.5 * hp.alpha2) * (w * w)


def penalty_grad(w: float, hp: Hyperparams) -> float:
    """Derivative of penalty(); zero unless w < 0."""
    if w >= 0.0:
        return 0.0
    return hp.alpha1 * smoothed_l1_grad(w, hp.kappa) + hp.alpha2 * w


def smoothed_l1_array(w: np.ndarray, kappa: float) -> np.ndarray:
    _check_kappa(kappa)
    a = np.abs(w)
    return np.where(a > kappa, a, (w * w) / (2.0 * kappa) + kappa / 2.0)


def smoothed_l1_grad_array(w: np.ndarray, kappa: float) -> np.ndarray:
    _check_kappa(kappa)
    return np.where(np.abs(w) > kappa, np.sign(w), w / kappa)


def penalty_array(w: np.ndarray, hp: Hyperparams) -> np.ndarray:
    val = hp.alpha1 * smoothed_l1_array(w, hp.kappa) + (0.5 * hp.alpha2) * (w * w)
    return np.where(w >= 0.0, 0.0, val)


def penalty_grad_array(w: np.ndarray, hp: Hyperparams) -> np.ndarray:
    val = hp.alpha1 * smoothed_l1_grad_array(w, hp.kappa) + hp.alpha2 * w
    return np.where(w >= 0.0, 0.0, val)
