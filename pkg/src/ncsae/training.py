"""Full-batch gradient descent training for single and stacked autoencoders.

Every training routine is a pure function of its inputs and the seed in the
hyperparameters: repeated calls produce bitwise-identical results. Epoch e
in a report holds the loss evaluated at the parameters produced by update e,
so the last record always describes the returned model.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .autoencoder import LossBreakdown, ae_forward, ae_grad, ae_loss
from .errors import TrainingDivergedError
from .linalg import as_matrix, check_unit_interval, make_rng, sigmoid, softmax_rows
from .params import AeParams, Hyperparams, init_ae_params, init_linear
from .penalties import penalty_array, penalty_grad_array

# Abort when the total loss passes this bound or stops being finite.
DIVERGENCE_LIMIT = 1e12


@dataclass
class EpochRecord:
    """Per-epoch supervised metrics."""

    cross_entropy: float
    accuracy: float


@dataclass
class TrainReport:
    """Per-epoch loss records plus a reference to the trained parameters."""

    records: list
    epochs_run: int
    final_params: object = None


@dataclass
class StackedNetwork:
    """Trained encoder layers plus an optional softmax head.

    After pretraining only each encoder's w1/bx participate in the forward
    pass; the decoders are kept for reconstruction diagnostics.
    """

    encoders: list[AeParams] = field(default_factory=list)
    softmax_w: np.ndarray | None = None
    softmax_b: np.ndarray | None = None

    def __post_init__(self):
        for i in range(1, len(self.encoders)):
            prev, cur = self.encoders[i - 1], self.encoders[i]
            if cur.n_visible != prev.n_hidden:
                raise ValueError(
                    f"encoder {i} expects {cur.n_visible} inputs but layer "
                    f"{i - 1} produces {prev.n_hidden}")
        if self.softmax_w is not None and self.encoders:
            if self.softmax_w.shape[1] != self.encoders[-1].n_hidden:
                raise ValueError(
                    f"softmax expects {self.softmax_w.shape[1]} features but the last "
                    f"encoder produces {self.encoders[-1].n_hidden}")

    @property
    def n_classes(self) -> int:
        if self.softmax_w is None:
            raise ValueError("network has no softmax head")
        return self.softmax_w.shape[0]

    def copy(self) -> "StackedNetwork":
        return StackedNetwork(
            encoders=[p.copy() for p in self.encoders],
            softmax_w=None if self.softmax_w is None else self.softmax_w.copy(),
            softmax_b=None if self.softmax_b is None else self.softmax_b.copy(),
        )


def _check_loss(total: float, epoch: int, context: str) -> None:
    if not np.isfinite(total) or total > DIVERGENCE_LIMIT:
        raise TrainingDivergedError(
            f"{context} diverged at epoch {epoch}: total loss {total}")


def train_ae(x: np.ndarray, n_hidden: int, hp: Hyperparams) -> tuple[AeParams, TrainReport]:
    """Train one autoencoder by full-batch gradient descent."""
    x = as_matrix(x, "x")
    if x.shape[0] < 1:
        raise ValueError("training data must have at least one row")
    check_unit_interval(x, "x")

    params = init_ae_params(x.shape[1], n_hidden, make_rng(hp.seed))
    records: list[LossBreakdown] = []
    for epoch in range(1, hp.epochs + 1):
        g = ae_grad(params, x, hp)
        params = AeParams(
            params.w1 - hp.learning_rate * g.dw1,
            params.bx - hp.learning_rate * g.dbx,
            params.w2 - hp.learning_rate * g.dw2,
            params.bh - hp.learning_rate * g.dbh,
        )
        loss = ae_loss(params, x, hp)
        _check_loss(loss.total, epoch, "autoencoder training")
        records.append(loss)
    return params, TrainReport(records=records, epochs_run=hp.epochs, final_params=params)


def encode(encoders: list[AeParams], x: np.ndarray) -> np.ndarray:
    """Forward x through every encoder sigmoid in order."""
    h = as_matrix(x, "x")
    for p in encoders:
        if h.shape[1] != p.n_visible:
            raise ValueError(
                f"encoder expects {p.n_visible} inputs, got {h.shape[1]}")
        h = sigmoid(h @ p.w1.T + p.bx)
    return h


def stack_pretrain(x: np.ndarray, layer_sizes: list[int],
                   hp: Hyperparams) -> tuple[StackedNetwork, list[TrainReport]]:
    """Greedy layerwise pretraining: each layer is trained on the previous
    layer's hidden activations. Layer i trains with seed hp.seed + i, so a
    single layer reproduces train_ae exactly."""
    if not layer_sizes:
        raise ValueError("layer_sizes must be nonempty")
    encoders: list[AeParams] = []
    reports: list[TrainReport] = []
    h = as_matrix(x, "x")
    for i, size in enumerate(layer_sizes):
        try:
            params, report = train_ae(h, size, hp.with_(seed=hp.seed + i))
        except TrainingDivergedError as e:
            raise TrainingDivergedError(f"layer {i}: {e}") from e
        encoders.append(params)
        reports.append(report)
        h, _ = ae_forward(params, h)
    return StackedNetwork(encoders=encoders), reports


def _one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    y = np.zeros((labels.shape[0], n_classes))
    y[np.arange(labels.shape[0]), labels] = 1.0
    return y


def _check_labels(labels, n_rows: int, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] != n_rows:
        raise ValueError(
            f"labels must be 1-D with {n_rows} entries, got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(labels == np.round(labels)):
            raise ValueError("labels must be integers")
    labels = labels.astype(np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(
            f"labels must lie in [0, {n_classes}), got range "
            f"[{labels.min()}, {labels.max()}]")
    return labels


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log softmax probability of the true class."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(labels.shape[0]), labels]
    return float(np.mean(lse - picked))


def softmax_head_loss(w: np.ndarray, b: np.ndarray, features: np.ndarray,
                      labels: np.ndarray, hp: Hyperparams) -> float:
    """Cross entropy plus the decay penalty on the head weights."""
    logits = features @ w.T + b
    return cross_entropy(logits, labels) + float(np.sum(penalty_array(w, hp)))


def softmax_head_grad(w: np.ndarray, b: np.ndarray, features: np.ndarray,
                      labels: np.ndarray, hp: Hyperparams) -> tuple[np.ndarray, np.ndarray]:
    m = features.shape[0]
    probs = softmax_rows(features @ w.T + b)
    delta = (probs - _one_hot(labels, w.shape[0])) / m
    dw = delta.T @ features + penalty_grad_array(w, hp)
    db = delta.sum(axis=0)
    return dw, db


def train_softmax(features: np.ndarray, labels, n_classes: int,
                  hp: Hyperparams) -> tuple[np.ndarray, np.ndarray, TrainReport]:
    """Train a softmax head on fixed features by full-batch gradient descent."""
    features = as_matrix(features, "features")
    labels = _check_labels(labels, features.shape[0], n_classes)

    counts = np.bincount(labels, minlength=n_classes)
    for c in np.flatnonzero(counts == 0):
        warnings.warn(f"class {c} has no training examples", stacklevel=2)

    w, b = init_linear(features.shape[1], n_classes, make_rng(hp.seed))
    records: list[EpochRecord] = []
    for epoch in range(1, hp.epochs + 1):
        dw, db = softmax_head_grad(w, b, features, labels, hp)
        w = w - hp.learning_rate * dw
        b = b - hp.learning_rate * db
        ce = softmax_head_loss(w, b, features, labels, hp)
        _check_loss(ce, epoch, "softmax training")
        acc = float(np.mean(np.argmax(features @ w.T + b, axis=1) == labels))
        records.append(EpochRecord(cross_entropy=ce, accuracy=acc))
    return w, b, TrainReport(records=records, epochs_run=hp.epochs, final_params=(w, b))


def _forward_activations(net: StackedNetwork, x: np.ndarray) -> list[np.ndarray]:
    """[x, hidden_1, ..., hidden_L] for the encoder stack."""
    acts = [x]
    for p in net.encoders:
        acts.append(sigmoid(acts[-1] @ p.w1.T + p.bx))
    return acts


def network_loss(net: StackedNetwork, x: np.ndarray, labels: np.ndarray,
                 hp: Hyperparams) -> float:
    """Cross entropy of the full network plus decay penalties on every
    weight matrix in the supervised path (encoder w1s and the softmax head)."""
    acts = _forward_activations(net, x)
    logits = acts[-1] @ net.softmax_w.T + net.softmax_b
    total = cross_entropy(logits, labels)
    for p in net.encoders:
        total += float(np.sum(penalty_array(p.w1, hp)))
    total += float(np.sum(penalty_array(net.softmax_w, hp)))
    return total


def network_grad(net: StackedNetwork, x: np.ndarray, labels: np.ndarray,
                 hp: Hyperparams) -> tuple[list[tuple[np.ndarray, np.ndarray]], np.ndarray, np.ndarray]:
    """Joint gradient: per-encoder (dw1, dbx) list plus softmax (dw, db)."""
    m = x.shape[0]
    acts = _forward_activations(net, x)
    probs = softmax_rows(acts[-1] @ net.softmax_w.T + net.softmax_b)
    delta = (probs - _one_hot(labels, net.n_classes)) / m

    dsw = delta.T @ acts[-1] + penalty_grad_array(net.softmax_w, hp)
    dsb = delta.sum(axis=0)

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(net.encoders)
    back = delta @ net.softmax_w
    for i in range(len(net.encoders) - 1, -1, -1):
        h = acts[i + 1]
        d = back * h * (1.0 - h)
        dw1 = d.T @ acts[i] + penalty_grad_array(net.encoders[i].w1, hp)
        grads[i] = (dw1, d.sum(axis=0))
        if i > 0:
            back = d @ net.encoders[i].w1
    return grads, dsw, dsb


def finetune(net: StackedNetwork, x: np.ndarray, labels,
             hp: Hyperparams) -> tuple[StackedNetwork, TrainReport]:
    """Jointly refine all encoder layers and the softmax head on labels.

    Only the supervised path is updated (encoder w1/bx and the head); the
    pretraining decoders are carried over untouched.
    """
    if net.softmax_w is None:
        raise ValueError("finetune requires a network with a softmax head")
    x = as_matrix(x, "x")
    check_unit_interval(x, "x")
    labels = _check_labels(labels, x.shape[0], net.n_classes)

    net = net.copy()
    records: list[EpochRecord] = []
    for epoch in range(1, hp.epochs + 1):
        grads, dsw, dsb = network_grad(net, x, labels, hp)
        for p, (dw1, dbx) in zip(net.encoders, grads):
            p.w1 -= hp.learning_rate * dw1
            p.bx -= hp.learning_rate * dbx
        net.softmax_w = net.softmax_w - hp.learning_rate * dsw
        net.softmax_b = net.softmax_b - hp.learning_rate * dsb
        ce = network_loss(net, x, labels, hp)
        _check_loss(ce, epoch, "fine-tuning")
        acc = evaluate_accuracy(net, x, labels)
        records.append(EpochRecord(cross_entropy=ce, accuracy=acc))
    return net, TrainReport(records=records, epochs_run=hp.epochs, final_params=net)


def predict(net: StackedNetwork, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Class probabilities and argmax labels (ties go to the lowest index)."""
    if net.softmax_w is None:
        raise ValueError("network has no softmax head")
    feats = encode(net.encoders, x)
    probs = softmax_rows(feats @ net.softmax_w.T + net.softmax_b)
    return probs, np.argmax(probs, axis=1)


def evaluate_accuracy(net: StackedNetwork, x: np.ndarray, labels) -> float:
    """Fraction of rows whose predicted label matches."""
    labels = np.asarray(labels)
    x = as_matrix(x, "x")
    if labels.ndim != 1 or labels.shape[0] != x.shape[0]:
        raise ValueError(
            f"labels length {labels.shape} does not match {x.shape[0]} rows")
    _, pred = predict(net, x)
    return float(np.mean(pred == labels.astype(np.int64)))
