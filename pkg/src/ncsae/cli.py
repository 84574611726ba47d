"""Command-line driver: pretrain, finetune, eval, and export.

Runs are configured by a flat JSON document (see RunConfig.FIELDS for the
key names and types); --seed and --out override the config. All outputs are
byte-deterministic for a fixed config and seed. Exit codes: 0 success,
1 runtime or numeric failure, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import model_io
from .data import (Dataset, bow_to_dataset, frequency_filter, info_gain_select,
                   load_bow, load_idx, load_matrix_csv, subset_by_labels)
from .errors import ConfigError, NcsaeError
from .metrics import (export_decay_curves, export_histogram_csv,
                      export_receptive_fields, kl_sparsity_measure,
                      nonneg_fraction, reconstruction_error, weight_histogram)
from .params import Hyperparams
from .training import (StackedNetwork, encode, evaluate_accuracy, finetune,
                       predict, stack_pretrain, train_softmax)


@dataclass
class RunConfig:
    """Flat, typed run configuration; every field maps to one JSON key."""

    data_format: str = "idx"            # idx | csv | bow
    images_path: str | None = None      # idx
    labels_path: str | None = None      # idx
    csv_path: str | None = None         # csv
    csv_has_labels: bool = True         # csv
    csv_has_header: bool = False        # csv: skip the first row
    bow_path: str | None = None         # bow
    bow_freq_lo: int = 4                # bow: drop rarer terms
    bow_freq_hi: int = 70               # bow: drop more frequent terms
    bow_top_k: int = 200                # bow: information-gain selection
    keep_labels: list | None = None     # optional class subset, re-indexed densely
    eval_images_path: str | None = None  # optional held-out set for accuracy
    eval_labels_path: str | None = None
    eval_csv_path: str | None = None
    hidden_sizes: list = None
    n_classes: int = 0
    sparsity_target: float = 0.05
    sparsity_weight: float = 3.0
    alpha1: float = 0.0003
    alpha2: float = 0.003
    kappa: float = 0.1
    pretrain_learning_rate: float = 0.5
    pretrain_epochs: int = 400
    softmax_learning_rate: float = 0.5
    softmax_epochs: int = 400
    finetune_learning_rate: float = 0.1
    finetune_epochs: int = 200
    seed: int = 0
    out_dir: str = "run_output"
    export_receptive_fields: bool = True
    export_histograms: bool = True
    histogram_bins: int = 50


def load_config(path, seed_override=None, out_override=None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown config field: {key!r}")
    cfg = RunConfig(**raw)
    if seed_override is not None:
        cfg.seed = seed_override
    if out_override is not None:
        cfg.out_dir = str(out_override)
    validate_config(cfg)
    return cfg


def _require_file(path, field: str) -> None:
    if path is None:
        raise ConfigError(f"config field {field!r} is required for this data format")
    if not Path(path).is_file():
        raise ConfigError(f"config field {field!r} names a missing file: {path}")


def validate_config(cfg: RunConfig) -> None:
    if cfg.data_format == "idx":
        _require_file(cfg.images_path, "images_path")
        _require_file(cfg.labels_path, "labels_path")
    elif cfg.data_format == "csv":
        _require_file(cfg.csv_path, "csv_path")
    elif cfg.data_format == "bow":
        _require_file(cfg.bow_path, "bow_path")
    else:
        raise ConfigError(
            f"config field 'data_format' must be idx, csv, or bow, got {cfg.data_format!r}")
    if cfg.eval_images_path or cfg.eval_labels_path:
        _require_file(cfg.eval_images_path, "eval_images_path")
        _require_file(cfg.eval_labels_path, "eval_labels_path")
    if cfg.eval_csv_path:
        _require_file(cfg.eval_csv_path, "eval_csv_path")
    if not cfg.hidden_sizes:
        raise ConfigError("config field 'hidden_sizes' must list at least one layer size")
    if any((not isinstance(s, int)) or s < 1 for s in cfg.hidden_sizes):
        raise ConfigError(f"config field 'hidden_sizes' must be positive integers, "
                          f"got {cfg.hidden_sizes}")
    if cfg.n_classes < 1:
        raise ConfigError(f"config field 'n_classes' must be >= 1, got {cfg.n_classes}")
    try:
        phase_hp(cfg, cfg.pretrain_learning_rate, cfg.pretrain_epochs)
    except ValueError as e:
        raise ConfigError(f"bad hyperparameter in config: {e}") from None


def phase_hp(cfg: RunConfig, learning_rate: float, epochs: int) -> Hyperparams:
    return Hyperparams(sparsity_target=cfg.sparsity_target,
                       sparsity_weight=cfg.sparsity_weight,
                       alpha1=cfg.alpha1, alpha2=cfg.alpha2, kappa=cfg.kappa,
                       learning_rate=learning_rate, epochs=epochs, seed=cfg.seed)


def load_dataset(cfg: RunConfig, evaluation: bool = False) -> Dataset:
    """Load the training set, or the held-out set when evaluation=True."""
    if evaluation and cfg.eval_images_path:
        d = load_idx(cfg.eval_images_path, cfg.eval_labels_path)
    elif evaluation and cfg.eval_csv_path:
        d = load_matrix_csv(cfg.eval_csv_path, has_labels=True)
    elif cfg.data_format == "idx":
        d = load_idx(cfg.images_path, cfg.labels_path)
    elif cfg.data_format == "csv":
        d = load_matrix_csv(cfg.csv_path, has_labels=cfg.csv_has_labels,
                            has_header=cfg.csv_has_header)
    else:
        corpus = load_bow(cfg.bow_path)
        corpus = frequency_filter(corpus, cfg.bow_freq_lo, cfg.bow_freq_hi)
        corpus = info_gain_select(corpus, cfg.bow_top_k)
        d = bow_to_dataset(corpus)
    if cfg.keep_labels:
        d = subset_by_labels(d, cfg.keep_labels)
    return d


def _tile_shape(n_features: int, image_shape) -> tuple[int, int]:
    if image_shape is not None and image_shape[0] * image_shape[1] == n_features:
        return tuple(image_shape)
    side = math.isqrt(n_features)
    if side * side == n_features:
        return side, side
    return 1, n_features


def _write_pretrain_report(path, report) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "recon", "kl", "penalty", "total"])
        for e, rec in enumerate(report.records, start=1):
            writer.writerow([e, repr(rec.recon), repr(rec.kl),
                             repr(rec.penalty), repr(rec.total)])


def _write_supervised_report(path, report) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "cross_entropy", "accuracy"])
        for e, rec in enumerate(report.records, start=1):
            writer.writerow([e, repr(rec.cross_entropy), repr(rec.accuracy)])


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def cmd_pretrain(cfg: RunConfig) -> int:
    data = load_dataset(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    hp = phase_hp(cfg, cfg.pretrain_learning_rate, cfg.pretrain_epochs)
    net, reports = stack_pretrain(data.x, list(cfg.hidden_sizes), hp)

    for i, (params, report) in enumerate(zip(net.encoders, reports)):
        model_io.save_ae_params(out / f"layer{i}_params.bin", params)
        _write_pretrain_report(out / f"layer{i}_report.csv", report)
        if cfg.export_receptive_fields:
            rows, cols = _tile_shape(params.n_visible,
                                     data.image_shape if i == 0 else None)
            grid_cols = math.ceil(math.sqrt(params.n_hidden))
            export_receptive_fields(params.w1, rows, cols, grid_cols,
                                    out / f"layer{i}_receptive_fields.pgm")
        if cfg.export_histograms:
            spec = weight_histogram(params.w1, cfg.histogram_bins, -1.0, 1.0)
            export_histogram_csv(spec, out / f"layer{i}_weight_histogram.csv")

    metrics = {
        "phase": "pretrain",
        "epochs": cfg.pretrain_epochs,
        "recon": reconstruction_error(net.encoders[0], data.x),
        "kl_sparsity": kl_sparsity_measure(net.encoders[0], data.x, cfg.sparsity_target),
        "nonneg_fraction_per_layer": [nonneg_fraction(p.w1) for p in net.encoders],
    }
    _write_json(out / "metrics.json", metrics)
    print(f"pretrained {len(net.encoders)} layer(s) -> {out}")
    return 0


def _load_pretrained(pretrained_dir, n_layers: int) -> list:
    pre = Path(pretrained_dir)
    encoders = []
    for i in range(n_layers):
        path = pre / f"layer{i}_params.bin"
        if not path.is_file():
            raise ConfigError(f"pretrained layer file not found: {path}")
        encoders.append(model_io.load_ae_params(path))
    return encoders


def cmd_finetune(cfg: RunConfig, pretrained_dir) -> int:
    data = load_dataset(cfg)
    encoders = _load_pretrained(pretrained_dir, len(cfg.hidden_sizes))
    for i, (p, size) in enumerate(zip(encoders, cfg.hidden_sizes)):
        if p.n_hidden != size:
            raise NcsaeError(
                f"layer {i} has {p.n_hidden} hidden units but config expects {size}")
    if encoders[0].n_visible != data.n_features:
        raise NcsaeError(
            f"layer 0 expects {encoders[0].n_visible} inputs but the data has "
            f"{data.n_features} features")
    if data.labels is None:
        raise ConfigError("finetune requires labeled data")

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    feats = encode(encoders, data.x)
    sw, sb, softmax_report = train_softmax(
        feats, data.labels, cfg.n_classes,
        phase_hp(cfg, cfg.softmax_learning_rate, cfg.softmax_epochs))
    net = StackedNetwork(encoders=encoders, softmax_w=sw, softmax_b=sb)

    eval_data = load_dataset(cfg, evaluation=True)
    accuracy_before = evaluate_accuracy(net, eval_data.x, eval_data.labels)

    if cfg.finetune_epochs > 0:
        net, finetune_report = finetune(
            net, data.x, data.labels,
            phase_hp(cfg, cfg.finetune_learning_rate, cfg.finetune_epochs))
        _write_supervised_report(out / "finetune_report.csv", finetune_report)
    accuracy_after = evaluate_accuracy(net, eval_data.x, eval_data.labels)

    model_io.save_network(out / "network.bin", net)
    _write_supervised_report(out / "softmax_report.csv", softmax_report)
    metrics = {
        "phase": "finetune",
        "epochs": cfg.finetune_epochs,
        "recon": reconstruction_error(net.encoders[0], data.x),
        "kl_sparsity": kl_sparsity_measure(net.encoders[0], data.x, cfg.sparsity_target),
        "nonneg_fraction_per_layer": [nonneg_fraction(p.w1) for p in net.encoders]
        + [nonneg_fraction(net.softmax_w)],
        "accuracy_before": accuracy_before,
        "accuracy_after": accuracy_after,
    }
    _write_json(out / "metrics.json", metrics)
    print(f"accuracy before fine-tuning: {accuracy_before}")
    print(f"accuracy after fine-tuning:  {accuracy_after}")
    return 0


def cmd_eval(model_path, cfg: RunConfig, out_path) -> int:
    if not Path(model_path).is_file():
        raise ConfigError(f"model file not found: {model_path}")
    net = model_io.load_network(model_path)
    data = load_dataset(cfg, evaluation=True)
    if data.labels is None:
        raise ConfigError("eval requires labeled data")

    probs, pred = predict(net, data.x)
    overall = float(np.mean(pred == data.labels))
    per_class = {}
    for c in sorted(set(int(v) for v in data.labels)):
        mask = data.labels == c
        name = data.class_names[c] if data.class_names else str(c)
        per_class[name] = float(np.mean(pred[mask] == c))

    print(f"accuracy: {overall}")
    for name, acc in per_class.items():
        print(f"  class {name}: {acc}")
    payload = {"accuracy": overall, "per_class_accuracy": per_class,
               "n_samples": int(data.n_samples)}
    if out_path is not None:
        _write_json(out_path, payload)
    return 0


def _parse_alpha_pairs(text: str) -> list[Hyperparams]:
    out = []
    for chunk in text.split(","):
        a1, sep, a2 = chunk.partition(":")
        if not sep:
            raise ConfigError(f"bad --alphas entry {chunk!r}, expected a1:a2")
        try:
            out.append(Hyperparams(alpha1=float(a1), alpha2=float(a2)))
        except ValueError as e:
            raise ConfigError(f"bad --alphas entry {chunk!r}: {e}") from None
    return out


# Decay settings shown by default: smoothed-L1 only, squared only, and the
# composite of both at the default strengths.
DEFAULT_DECAY_SETTINGS = "0.0003:0,0:0.003,0.0003:0.003"


def _load_layer_weights(params_path, layer: int) -> np.ndarray:
    arrays = model_io.load_arrays(params_path)
    if "w1" in arrays:
        return arrays["w1"]
    key = f"enc{layer}.w1"
    if key in arrays:
        return arrays[key]
    raise NcsaeError(f"{params_path} holds no encoder weights for layer {layer}")


def cmd_export(args) -> int:
    if args.what == "decay":
        settings = _parse_alpha_pairs(args.alphas)
        export_decay_curves(settings, args.lo, args.hi, args.steps, args.out)
    elif args.what == "rf":
        if not Path(args.params).is_file():
            raise ConfigError(f"params file not found: {args.params}")
        w1 = _load_layer_weights(args.params, args.layer)
        if args.img_rows and args.img_cols:
            rows, cols = args.img_rows, args.img_cols
        else:
            rows, cols = _tile_shape(w1.shape[1], None)
        grid_cols = args.grid_cols or math.ceil(math.sqrt(w1.shape[0]))
        export_receptive_fields(w1, rows, cols, grid_cols, args.out)
    else:
        if not Path(args.params).is_file():
            raise ConfigError(f"params file not found: {args.params}")
        w1 = _load_layer_weights(args.params, args.layer)
        export_histogram_csv(weight_histogram(w1, args.bins, args.lo, args.hi),
                             args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncsae",
        description="Train and inspect nonnegativity-constrained sparse autoencoders")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pretrain", help="greedy layerwise autoencoder pretraining")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("finetune", help="train the softmax head and fine-tune jointly")
    p.add_argument("--config", required=True)
    p.add_argument("--pretrained", required=True,
                   help="directory holding layer*_params.bin from pretrain")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("eval", help="evaluate a trained network on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="where to write eval.json")

    p = sub.add_parser("export", help="write decay curves, receptive fields, or histograms")
    what = p.add_subparsers(dest="what", required=True)

    d = what.add_parser("decay", help="penalty and gradient curves as CSV")
    d.add_argument("--out", required=True)
    d.add_argument("--alphas", default=DEFAULT_DECAY_SETTINGS,
                   help="comma-separated a1:a2 pairs")
    d.add_argument("--lo", type=float, default=-1.0)
    d.add_argument("--hi", type=float, default=1.0)
    d.add_argument("--steps", type=int, default=201)

    r = what.add_parser("rf", help="receptive-field grid as PGM")
    r.add_argument("--params", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--layer", type=int, default=0)
    r.add_argument("--img-rows", type=int, default=None)
    r.add_argument("--img-cols", type=int, default=None)
    r.add_argument("--grid-cols", type=int, default=None)

    h = what.add_parser("hist", help="weight histogram as CSV")
    h.add_argument("--params", required=True)
    h.add_argument("--out", required=True)
    h.add_argument("--layer", type=int, default=0)
    h.add_argument("--bins", type=int, default=50)
    h.add_argument("--lo", type=float, default=-1.0)
    h.add_argument("--hi", type=float, default=1.0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "pretrain":
            cfg = load_config(args.config, args.seed, args.out)
            return cmd_pretrain(cfg)
        if args.command == "finetune":
            cfg = load_config(args.config, args.seed, args.out)
            return cmd_finetune(cfg, args.pretrained)
        if args.command == "eval":
            cfg = load_config(args.config, args.seed, None)
            return cmd_eval(args.model, cfg, args.out)
        return cmd_export(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NcsaeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
