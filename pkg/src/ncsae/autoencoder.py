"""Forward pass, composite loss, and analytic gradients for one autoencoder.

The objective has three parts: mean squared reconstruction error over the
batch, a KL divergence pulling each hidden unit's mean activation toward
the sparsity target, and the nonnegativity decay penalty summed over every
entry of both weight matrices (never the biases).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, sigmoid
from .params import AeParams, Hyperparams
from .penalties import penalty_array, penalty_grad_array

# Mean activations are clamped away from {0, 1} before the logs so dead or
# saturated units keep the loss finite.
MEAN_ACT_CLAMP = 1e-8


@dataclass
class LossBreakdown:
    """Loss components; total is their sum by construction."""

    recon: float
    kl: float
    penalty: float

    @property
    def total(self) -> float:
        return self.recon + self.kl + self.penalty


@dataclass
class AeGrads:
    """Gradients matching the shapes of AeParams."""

    dw1: np.ndarray
    dbx: np.ndarray
    dw2: np.ndarray
    dbh: np.ndarray


def _check_batch(params: AeParams, x: np.ndarray) -> np.ndarray:
    x = as_matrix(x, "x_batch")
    if x.shape[1] != params.n_visible:
        raise ValueError(
            f"x_batch has {x.shape[1]} columns but the encoder expects {params.n_visible}")
    return x


def ae_forward(params: AeParams, x_batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Encode then decode a batch; returns (hidden, reconstruction)."""
    x = _check_batch(params, x_batch)
    hidden = sigmoid(x @ params.w1.T + params.bx)
    recon = sigmoid(hidden @ params.w2.T + params.bh)
    return hidden, recon


def kl_term(target: float, mean_act: np.ndarray) -> float:
    """Sum over units of KL(target || mean activation) for Bernoulli rates."""
    if not 0.0 < target < 1.0:
        raise ValueError(f"target activation must be in (0, 1), got {target}")
    q = np.clip(np.asarray(mean_act, dtype=np.float64),
                MEAN_ACT_CLAMP, 1.0 - MEAN_ACT_CLAMP)
    return float(np.sum(target * np.log(target / q)
                        + (1.0 - target) * np.log((1.0 - target) / (1.0 - q))))


def reconstruction_cost(recon: np.ndarray, x: np.ndarray) -> float:
    """(1/m) * sum of squared errors over the batch."""
    m = x.shape[0]
    d = recon - x
    return float(np.sum(d * d) / m)


def weight_penalty(params: AeParams, hp: Hyperparams) -> float:
    """Decay penalty summed over all entries of both weight matrices."""
    return float(np.sum(penalty_array(params.w1, hp)) + np.sum(penalty_array(params.w2, hp)))


def ae_loss(params: AeParams, x_batch: np.ndarray, hp: Hyperparams) -> LossBreakdown:
    """Composite loss at the given parameters."""
    x = _check_batch(params, x_batch)
    hidden, recon = ae_forward(params, x)
    rho = hidden.mean(axis=0)
    return LossBreakdown(
        recon=reconstruction_cost(recon, x),
        kl=hp.sparsity_weight * kl_term(hp.sparsity_target, rho),
        penalty=weight_penalty(params, hp),
    )


def ae_grad(params: AeParams, x_batch: np.ndarray, hp: Hyperparams) -> AeGrads:
    """Analytic gradient of ae_loss(...).total with respect to every parameter."""
    x = _check_batch(params, x_batch)
    m = x.shape[0]

    hidden, recon = ae_forward(params, x)

    # Reconstruction: d/dz2 of (1/m) * sum((recon - x)^2) through the sigmoid.
    delta2 = (2.0 / m) * (recon - x) * recon * (1.0 - recon)
    dw2 = delta2.T @ hidden
    dbh = delta2.sum(axis=0)

    # KL term routes through each hidden unit's mean activation.
    rho = np.clip(hidden.mean(axis=0), MEAN_ACT_CLAMP, 1.0 - MEAN_ACT_CLAMP)
    dkl_dh = (hp.sparsity_weight / m) * (
        -hp.sparsity_target / rho + (1.0 - hp.sparsity_target) / (1.0 - rho))

    back = delta2 @ params.w2 + dkl_dh
    delta1 = back * hidden * (1.0 - hidden)
    dw1 = delta1.T @ x
    dbx = delta1.sum(axis=0)

    # Decay penalty touches the weight matrices only.
    dw1 += penalty_grad_array(params.w1, hp)
    dw2 += penalty_grad_array(params.w2, hp)

    return AeGrads(dw1=dw1, dbx=dbx, dw2=dw2, dbh=dbh)
