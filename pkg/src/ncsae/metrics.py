"""Evaluation quantities and figure-style exports.

Receptive fields go out as binary PGM (P5) grids: weight -1 maps to black
(0), 0 to mid-gray (127), +1 to white (255), values outside [-1, 1] are
clipped, and tiles are separated by 1-pixel black lines. Decay curves and
histograms go out as plain CSV.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .autoencoder import ae_forward, kl_term, reconstruction_cost
from .errors import DataFormatError
from .linalg import as_matrix
from .params import AeParams, Hyperparams
from .penalties import penalty, penalty_grad


def reconstruction_error(params: AeParams, x: np.ndarray) -> float:
    """Mean squared reconstruction error; identical to the loss component."""
    x = as_matrix(x, "x")
    _, recon = ae_forward(params, x)
    return reconstruction_cost(recon, x)


def kl_sparsity_measure(params: AeParams, x: np.ndarray, target: float) -> float:
    """KL divergence of the mean hidden activations from the target rate."""
    hidden, _ = ae_forward(params, as_matrix(x, "x"))
    return kl_term(target, hidden.mean(axis=0))


def nonneg_fraction(w: np.ndarray) -> float:
    """Fraction of entries >= 0 (zeros count as nonnegative)."""
    w = np.asarray(w, dtype=np.float64)
    if w.size == 0:
        raise ValueError("nonneg_fraction of an empty matrix is undefined")
    return float(np.mean(w >= 0.0))


@dataclass
class HistogramSpec:
    """Uniform-bin histogram: len(counts) == len(bin_edges) - 1."""

    bin_edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        if len(self.counts) != len(self.bin_edges) - 1:
            raise ValueError("counts length must be len(bin_edges) - 1")


def weight_histogram(w: np.ndarray, bins: int, lo: float, hi: float) -> HistogramSpec:
    """Histogram over uniform bins on [lo, hi]; out-of-range values land in
    the end bins so the counts always conserve the entry count."""
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if not lo < hi:
        raise ValueError(f"invalid histogram range: [{lo}, {hi})")
    w = np.asarray(w, dtype=np.float64)
    counts, edges = np.histogram(np.clip(w.ravel(), lo, hi), bins=bins, range=(lo, hi))
    return HistogramSpec(bin_edges=edges, counts=counts)


def quantize_weight_pixels(w: np.ndarray) -> np.ndarray:
    """Map weights to grayscale bytes: -1 -> 0, 0 -> 127, +1 -> 255."""
    scaled = np.floor((np.clip(w, -1.0, 1.0) + 1.0) / 2.0 * 255.0)
    return np.clip(scaled, 0, 255).astype(np.uint8)


def write_pgm(path, pixels: np.ndarray) -> None:
    """Write a 2-D uint8 array as binary PGM: "P5\\n<w> <h>\\n255\\n" + raster."""
    if pixels.ndim != 2 or pixels.dtype != np.uint8:
        raise ValueError("write_pgm expects a 2-D uint8 array")
    h, w = pixels.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary PGM produced by write_pgm."""
    with open(path, "rb") as f:
        data = f.read()
    try:
        magic, dims, maxval, raster = data.split(b"\n", 3)
        w, h = (int(t) for t in dims.split())
    except ValueError:
        raise DataFormatError(f"malformed PGM header in {path}") from None
    if magic != b"P5":
        raise DataFormatError(f"not a binary PGM (magic {magic!r})")
    if maxval != b"255":
        raise DataFormatError(f"unsupported PGM maxval {maxval!r}")
    if len(raster) != w * h:
        raise DataFormatError(
            f"PGM raster has {len(raster)} bytes, expected {w * h}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w)


def receptive_field_grid(w1: np.ndarray, img_rows: int, img_cols: int,
                         grid_cols: int) -> np.ndarray:
    """Tile each hidden unit's weight row as an image; separators are black."""
    w1 = as_matrix(w1, "w1")
    if w1.shape[1] != img_rows * img_cols:
        raise ValueError(
            f"w1 has {w1.shape[1]} columns, cannot reshape to {img_rows}x{img_cols}")
    if grid_cols < 1:
        raise ValueError(f"grid_cols must be >= 1, got {grid_cols}")
    n_units = w1.shape[0]
    grid_rows = math.ceil(n_units / grid_cols)
    height = grid_rows * img_rows + (grid_rows - 1)
    width = grid_cols * img_cols + (grid_cols - 1)
    canvas = np.zeros((height, width), dtype=np.uint8)
    for u in range(n_units):
        r, c = divmod(u, grid_cols)
        tile = quantize_weight_pixels(w1[u].reshape(img_rows, img_cols))
        top, left = r * (img_rows + 1), c * (img_cols + 1)
        canvas[top:top + img_rows, left:left + img_cols] = tile
    return canvas


def export_receptive_fields(w1: np.ndarray, img_rows: int, img_cols: int,
                            grid_cols: int, path) -> None:
    """Write the receptive-field grid of an encoder weight matrix as PGM."""
    write_pgm(path, receptive_field_grid(w1, img_rows, img_cols, grid_cols))


def export_histogram_csv(spec: HistogramSpec, path) -> None:
    """CSV with one row per bin: bin_lo, bin_hi, count."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["bin_lo", "bin_hi", "count"])
        for i, n in enumerate(spec.counts):
            writer.writerow([repr(float(spec.bin_edges[i])),
                             repr(float(spec.bin_edges[i + 1])), int(n)])


def export_decay_curves(hp_list: list[Hyperparams], w_lo: float, w_hi: float,
                        steps: int, path) -> None:
    """Sample penalty and penalty_grad for each setting on a uniform grid.

    The CSV has a w column plus penalty/grad columns per setting; rows
    cover [w_lo, w_hi] inclusive with `steps` samples.
    """
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    if not w_lo < w_hi:
        raise ValueError(f"invalid range: [{w_lo}, {w_hi}]")
    header = ["w"]
    for hp in hp_list:
        tag = f"a1_{hp.alpha1:g}_a2_{hp.alpha2:g}"
        header += [f"penalty_{tag}", f"grad_{tag}"]
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for i in range(steps):
            w = w_lo + i * (w_hi - w_lo) / (steps - 1)
            row = [repr(w)]
            for hp in hp_list:
                row += [repr(penalty(w, hp)), repr(penalty_grad(w, hp))]
            writer.writerow(row)
