"""Nonnegativity-constrained sparse autoencoders.

Sigmoid autoencoders trained with a composite objective: squared
reconstruction error, a KL term pulling mean hidden activations toward a
sparsity target, and a smoothed-L1 plus squared decay penalty that pushes
negative weights toward zero so the learned features become part-based and
readable. Includes greedy stacked pretraining, softmax fine-tuning, dataset
ingestion (IDX images, CSV, bag-of-words with information-gain selection),
and interpretability exports.
"""

from .autoencoder import (AeGrads, LossBreakdown, ae_forward, ae_grad, ae_loss,
                          kl_term)
from .data import (BowCorpus, Dataset, bow_to_dataset, frequency_filter,
                   info_gain_select, information_gain, load_bow, load_idx,
                   load_matrix_csv, save_idx, subset_by_labels)
from .datasets import make_digit_corpus
from .errors import (ConfigError, DataFormatError, NcsaeError,
                     TrainingDivergedError)
from .estimators import NonnegSparseAutoencoder, StackedAutoencoderClassifier
from .linalg import (make_rng, matmul, rng_uniform, sigmoid, softmax_rows)
from .metrics import (HistogramSpec, export_decay_curves,
                      export_receptive_fields, kl_sparsity_measure,
                      nonneg_fraction, read_pgm, reconstruction_error,
                      weight_histogram, write_pgm)
from .model_io import (load_ae_params, load_arrays, load_network,
                       save_ae_params, save_arrays, save_network)
from .params import AeParams, Hyperparams, init_ae_params
from .penalties import (penalty, penalty_grad, smoothed_l1, smoothed_l1_grad)
from .training import (EpochRecord, StackedNetwork, TrainReport, encode,
                       evaluate_accuracy, finetune, predict, stack_pretrain,
                       train_ae, train_softmax)

__version__ = "0.1.0"

__all__ = [
    "AeGrads", "AeParams", "BowCorpus", "ConfigError", "DataFormatError",
    "Dataset", "EpochRecord", "HistogramSpec", "Hyperparams", "LossBreakdown",
    "NcsaeError", "NonnegSparseAutoencoder", "StackedAutoencoderClassifier",
    "StackedNetwork", "TrainReport", "TrainingDivergedError",
    "ae_forward", "ae_grad", "ae_loss", "bow_to_dataset", "encode",
    "evaluate_accuracy", "export_decay_curves", "export_receptive_fields",
    "finetune", "frequency_filter", "info_gain_select", "information_gain",
    "init_ae_params", "kl_sparsity_measure", "kl_term", "load_ae_params",
    "load_arrays", "load_bow", "load_idx", "load_matrix_csv", "load_network",
    "make_digit_corpus", "make_rng", "matmul", "nonneg_fraction", "penalty",
    "penalty_grad", "predict", "read_pgm", "reconstruction_error",
    "rng_uniform", "save_ae_params", "save_arrays", "save_idx",
    "save_network", "sigmoid", "smoothed_l1", "smoothed_l1_grad",
    "softmax_rows", "stack_pretrain", "subset_by_labels", "train_ae",
    "train_softmax", "weight_histogram", "write_pgm",
]
