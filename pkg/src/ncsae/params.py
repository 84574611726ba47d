"""Hyperparameter and autoencoder parameter containers."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .linalg import as_matrix, as_vector, rng_uniform


@dataclass
class Hyperparams:
    """Training settings for one autoencoder or classifier head.

    sparsity_target is the desired mean hidden activation, sparsity_weight
    scales the KL sparsity term, alpha1/alpha2 scale the smoothed-L1 and
    squared penalties on negative weights, and kappa is the knee below
    which the L1 part switches to its quadratic approximation.
    """

    sparsity_target: float = 0.05
    sparsity_weight: float = 3.0
    alpha1: float = 0.0003
    alpha2: float = 0.003
    kappa: float = 0.1
    learning_rate: float = 0.5
    epochs: int = 400
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.sparsity_target < 1.0:
            raise ValueError(f"sparsity_target must be in (0, 1), got {self.sparsity_target}")
        if self.sparsity_weight < 0.0:
            raise ValueError(f"sparsity_weight must be >= 0, got {self.sparsity_weight}")
        if self.alpha1 < 0.0 or self.alpha2 < 0.0:
            raise ValueError(f"alpha1/alpha2 must be >= 0, got {self.alpha1}, {self.alpha2}")
        if self.kappa <= 0.0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.learning_rate <= 0.0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")

    def with_(self, **changes) -> "Hyperparams":
        return replace(self, **changes)


@dataclass
class AeParams:
    """Encoder/decoder weights and biases of a single autoencoder.

    w1: (n_hidden, n_visible) encoder weights
    bx: (n_hidden,) encoder bias
    w2: (n_visible, n_hidden) decoder weights
    bh: (n_visible,) decoder bias
    """

    w1: np.ndarray
    bx: np.ndarray
    w2: np.ndarray
    bh: np.ndarray

    def __post_init__(self):
        self.w1 = as_matrix(self.w1, "w1")
        self.bx = as_vector(self.bx, "bx")
        self.w2 = as_matrix(self.w2, "w2")
        self.bh = as_vector(self.bh, "bh")
        n_hidden, n_visible = self.w1.shape
        if self.w2.shape != (n_visible, n_hidden):
            raise ValueError(
                f"w2 shape {self.w2.shape} does not mirror w1 shape {self.w1.shape}")
        if self.bx.shape != (n_hidden,):
            raise ValueError(f"bx length {self.bx.shape[0]} != n_hidden {n_hidden}")
        if self.bh.shape != (n_visible,):
            raise ValueError(f"bh length {self.bh.shape[0]} != n_visible {n_visible}")

    @property
    def n_visible(self) -> int:
        return self.w1.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.w1.shape[0]

    def copy(self) -> "AeParams":
        return AeParams(self.w1.copy(), self.bx.copy(), self.w2.copy(), self.bh.copy())


def init_ae_params(n_visible: int, n_hidden: int, rng: np.random.Generator) -> AeParams:
    """Uniform [-r, r] weights with r = sqrt(6 / (fan_in + fan_out + 1)), zero biases.

    w1 is drawn before w2, so the draw order is part of the reproducibility
    contract.
    """
    r = math.sqrt(6.0 / (n_visible + n_hidden + 1))
    w1 = rng_uniform(rng, -r, r, n_hidden, n_visible)
    w2 = rng_uniform(rng, -r, r, n_visible, n_hidden)
    return AeParams(w1, np.zeros(n_hidden), w2, np.zeros(n_visible))


def init_linear(n_in: int, n_out: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Seeded init for a linear layer: (n_out, n_in) weights plus zero bias."""
    r = math.sqrt(6.0 / (n_in + n_out + 1))
    w = rng_uniform(rng, -r, r, n_out, n_in)
    return w, np.zeros(n_out)
