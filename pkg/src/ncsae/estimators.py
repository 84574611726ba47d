"""Scikit-learn style estimators wrapping the functional training core.

NonnegSparseAutoencoder is a transformer (fit/transform/inverse_transform);
StackedAutoencoderClassifier is a classifier (fit/predict/predict_proba).
Both are clonable, expose get_params/set_params, and validate inputs with
the package's own matrix helpers.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .autoencoder import ae_forward
from .linalg import as_matrix, check_unit_interval, sigmoid
from .params import Hyperparams
from .training import (StackedNetwork, encode, evaluate_accuracy, finetune,
                       predict, stack_pretrain, train_ae, train_softmax)


class NonnegSparseAutoencoder(BaseEstimator, TransformerMixin):
    """Single sparse autoencoder whose negative weights are decayed toward zero.

    transform() returns hidden activations; inverse_transform() decodes them
    back to input space. Set alpha1=alpha2=0 for a plain sparse autoencoder.
    """

    def __init__(self, n_hidden=196, sparsity_target=0.05, sparsity_weight=3.0,
                 alpha1=0.0003, alpha2=0.003, kappa=0.1, learning_rate=0.5,
                 n_epochs=400, random_state=0):
        self.n_hidden = n_hidden
        self.sparsity_target = sparsity_target
        self.sparsity_weight = sparsity_weight
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.kappa = kappa
        self.learning_rate = learning_rate
        self.n_epochs = n_epochs
        self.random_state = random_state

    def _hyperparams(self) -> Hyperparams:
        return Hyperparams(
            sparsity_target=self.sparsity_target,
            sparsity_weight=self.sparsity_weight,
            alpha1=self.alpha1, alpha2=self.alpha2, kappa=self.kappa,
            learning_rate=self.learning_rate, epochs=self.n_epochs,
            seed=self.random_state)

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        check_unit_interval(X, "X")
        self.params_, self.report_ = train_ae(X, self.n_hidden, self._hyperparams())
        self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError(
                f"{type(self).__name__} must be fitted before calling this method")

    def transform(self, X) -> np.ndarray:
        self._check_fitted()
        hidden, _ = ae_forward(self.params_, as_matrix(X, "X"))
        return hidden

    def inverse_transform(self, H) -> np.ndarray:
        self._check_fitted()
        H = as_matrix(H, "H")
        if H.shape[1] != self.params_.n_hidden:
            raise ValueError(
                f"H has {H.shape[1]} columns, expected {self.params_.n_hidden}")
        return sigmoid(H @ self.params_.w2.T + self.params_.bh)

    def reconstruct(self, X) -> np.ndarray:
        self._check_fitted()
        _, recon = ae_forward(self.params_, as_matrix(X, "X"))
        return recon


class StackedAutoencoderClassifier(BaseEstimator, ClassifierMixin):
    """Greedy layerwise pretrained encoder stack with a softmax head.

    fit() pretrains each layer as an autoencoder, trains the head on the
    deepest features, then optionally fine-tunes the whole network jointly.
    """

    def __init__(self, hidden_layer_sizes=(10, 10), sparsity_target=0.05,
                 sparsity_weight=3.0, alpha1=0.0003, alpha2=0.003, kappa=0.1,
                 pretrain_learning_rate=0.5, pretrain_epochs=400,
                 softmax_learning_rate=0.5, softmax_epochs=400,
                 finetune_learning_rate=0.1, finetune_epochs=200,
                 random_state=0):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.sparsity_target = sparsity_target
        self.sparsity_weight = sparsity_weight
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.kappa = kappa
        self.pretrain_learning_rate = pretrain_learning_rate
        self.pretrain_epochs = pretrain_epochs
        self.softmax_learning_rate = softmax_learning_rate
        self.softmax_epochs = softmax_epochs
        self.finetune_learning_rate = finetune_learning_rate
        self.finetune_epochs = finetune_epochs
        self.random_state = random_state

    def _phase_hp(self, learning_rate, epochs) -> Hyperparams:
        return Hyperparams(
            sparsity_target=self.sparsity_target,
            sparsity_weight=self.sparsity_weight,
            alpha1=self.alpha1, alpha2=self.alpha2, kappa=self.kappa,
            learning_rate=learning_rate, epochs=epochs, seed=self.random_state)

    def fit(self, X, y):
        X = as_matrix(X, "X")
        check_unit_interval(X, "X")
        y = np.asarray(y)
        if y.shape != (X.shape[0],):
            raise ValueError(
                f"y must be 1-D with {X.shape[0]} entries, got shape {y.shape}")
        self.classes_, y_idx = np.unique(y, return_inverse=True)

        net, self.pretrain_reports_ = stack_pretrain(
            X, list(self.hidden_layer_sizes),
            self._phase_hp(self.pretrain_learning_rate, self.pretrain_epochs))

        feats = encode(net.encoders, X)
        sw, sb, self.softmax_report_ = train_softmax(
            feats, y_idx, len(self.classes_),
            self._phase_hp(self.softmax_learning_rate, self.softmax_epochs))
        net = StackedNetwork(encoders=net.encoders, softmax_w=sw, softmax_b=sb)
        self.accuracy_before_finetune_ = evaluate_accuracy(net, X, y_idx)

        if self.finetune_epochs > 0:
            net, self.finetune_report_ = finetune(
                net, X, y_idx,
                self._phase_hp(self.finetune_learning_rate, self.finetune_epochs))
        else:
            self.finetune_report_ = None
        self.network_ = net
        self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "network_"):
            raise NotFittedError(
                f"{type(self).__name__} must be fitted before calling this method")

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        probs, _ = predict(self.network_, as_matrix(X, "X"))
        return probs

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        _, idx = predict(self.network_, as_matrix(X, "X"))
        return self.classes_[idx]
