"""Dataset ingestion: IDX image files, numeric CSV, and bag-of-words text.

File formats
------------
IDX images: big-endian magic 0x00000803, then u32 count/rows/cols, then
    count*rows*cols pixel bytes row-major. Labels: magic 0x00000801, u32
    count, then count label bytes.
CSV: comma-separated reals in [0, 1]; with has_labels the last column holds
    integer class indices.
BoW: one document per line, "label<TAB>term:count term:count ...".
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .linalg import as_matrix

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


@dataclass
class Dataset:
    """Sample matrix in [0, 1] with optional integer labels.

    image_shape remembers (rows, cols) for data parsed from image files so
    receptive fields can be tiled and files round-tripped.
    """

    x: np.ndarray
    labels: np.ndarray | None = None
    class_names: list[str] | None = None
    image_shape: tuple[int, int] | None = None

    def __post_init__(self):
        self.x = as_matrix(self.x, "x")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.x.shape[0],):
                raise ValueError(
                    f"labels shape {self.labels.shape} does not match "
                    f"{self.x.shape[0]} rows")

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]


@dataclass
class BowCorpus:
    """Term-count matrix (docs x vocabulary) with term names and labels."""

    counts: np.ndarray
    vocab: list[str]
    labels: np.ndarray

    def __post_init__(self):
        self.counts = as_matrix(self.counts, "counts")
        if self.counts.shape[1] != len(self.vocab):
            raise ValueError(
                f"counts has {self.counts.shape[1]} columns but vocab has "
                f"{len(self.vocab)} terms")
        if np.any(self.counts < 0) or np.any(self.counts != np.round(self.counts)):
            raise ValueError("counts entries must be nonnegative integers")
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape != (self.counts.shape[0],):
            raise ValueError(
                f"labels shape {self.labels.shape} does not match "
                f"{self.counts.shape[0]} documents")


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise DataFormatError(
            f"truncated IDX file: expected {n} bytes for {what}, got {len(data)}")
    return data


def load_idx(images_path, labels_path) -> Dataset:
    """Parse an IDX image/label file pair into a Dataset scaled by 1/255."""
    with open(images_path, "rb") as f:
        magic, = struct.unpack(">I", _read_exact(f, 4, "image magic"))
        if magic != IDX_IMAGE_MAGIC:
            raise DataFormatError(
                f"bad image magic: expected {IDX_IMAGE_MAGIC:#010x}, got {magic:#010x}")
        count, rows, cols = struct.unpack(">III", _read_exact(f, 12, "image header"))
        pixels = _read_exact(f, count * rows * cols, "pixel data")
        if f.read(1):
            raise DataFormatError("trailing bytes after pixel data")
    with open(labels_path, "rb") as f:
        magic, = struct.unpack(">I", _read_exact(f, 4, "label magic"))
        if magic != IDX_LABEL_MAGIC:
            raise DataFormatError(
                f"bad label magic: expected {IDX_LABEL_MAGIC:#010x}, got {magic:#010x}")
        label_count, = struct.unpack(">I", _read_exact(f, 4, "label header"))
        label_bytes = _read_exact(f, label_count, "label data")
        if f.read(1):
            raise DataFormatError("trailing bytes after label data")
    if label_count != count:
        raise DataFormatError(
            f"image/label count mismatch: {count} images vs {label_count} labels")

    x = np.frombuffer(pixels, dtype=np.uint8).astype(np.float64)
    x = x.reshape(count, rows * cols) / 255.0
    labels = np.frombuffer(label_bytes, dtype=np.uint8).astype(np.int64)
    return Dataset(x=x, labels=labels, image_shape=(rows, cols))


def save_idx(d: Dataset, images_path, labels_path) -> None:
    """Write a Dataset back to an IDX pair; inverse of load_idx."""
    if d.labels is None:
        raise ValueError("save_idx requires labels")
    if d.image_shape is None:
        side = math.isqrt(d.n_features)
        if side * side != d.n_features:
            raise ValueError(
                f"cannot infer image shape for {d.n_features} features; "
                "set image_shape")
        shape = (side, side)
    else:
        shape = d.image_shape
    pixels = np.round(d.x * 255.0).astype(np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGE_MAGIC, d.n_samples, shape[0], shape[1]))
        f.write(pixels.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABEL_MAGIC, d.n_samples))
        f.write(d.labels.astype(np.uint8).tobytes())


def subset_by_labels(d: Dataset, keep: list[int]) -> Dataset:
    """Keep only rows whose label is in keep, re-indexed densely in keep order."""
    if d.labels is None:
        raise ValueError("subset_by_labels requires labels")
    if not list(keep):
        raise ValueError("keep must list at least one label")
    mapping = {int(k): i for i, k in enumerate(keep)}
    if len(mapping) != len(list(keep)):
        raise ValueError(f"keep contains duplicates: {list(keep)}")
    mask = np.isin(d.labels, list(mapping))
    if not mask.any():
        raise ValueError(f"no rows have a label in {list(keep)}")
    new_labels = np.array([mapping[int(v)] for v in d.labels[mask]], dtype=np.int64)
    return Dataset(x=d.x[mask].copy(), labels=new_labels,
                   class_names=[str(k) for k in keep], image_shape=d.image_shape)


def load_matrix_csv(path, has_labels: bool = False, has_header: bool = False) -> Dataset:
    """Read a rectangular numeric CSV; values outside [0, 1] are an error.

    has_header skips the first nonempty line.
    """
    rows: list[list[float]] = []
    labels: list[int] = []
    width = None
    skipped_header = not has_header
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            if not skipped_header:
                skipped_header = True
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise DataFormatError(
                    f"ragged CSV: row {lineno} has {len(cells)} cells, expected {width}")
            try:
                values = [float(c) for c in cells]
            except ValueError:
                raise DataFormatError(
                    f"non-numeric cell in row {lineno}: {line!r}") from None
            if has_labels:
                label = values.pop()
                if label != int(label):
                    raise DataFormatError(
                        f"non-integer label {label} in row {lineno}")
                labels.append(int(label))
            for col, v in enumerate(values, start=1):
                if not 0.0 <= v <= 1.0:
                    raise DataFormatError(
                        f"value {v} out of range [0, 1] at row {lineno}, column {col}")
            rows.append(values)
    if not rows:
        raise DataFormatError(f"empty CSV file: {path}")
    x = np.array(rows, dtype=np.float64)
    return Dataset(x=x, labels=np.array(labels, dtype=np.int64) if has_labels else None)


def load_bow(path) -> BowCorpus:
    """Read a bag-of-words file: one "label<TAB>term:count ..." line per document.

    Vocabulary order is first appearance over the file, top to bottom.
    """
    vocab: list[str] = []
    index: dict[str, int] = {}
    docs: list[dict[int, float]] = []
    labels: list[int] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            head, _, rest = line.partition("\t")
            try:
                labels.append(int(head))
            except ValueError:
                raise DataFormatError(
                    f"line {lineno}: label {head!r} is not an integer") from None
            doc: dict[int, float] = {}
            for token in rest.split():
                term, sep, count = token.rpartition(":")
                if not sep or not term:
                    raise DataFormatError(
                        f"line {lineno}: malformed term:count token {token!r}")
                try:
                    n = int(count)
                except ValueError:
                    raise DataFormatError(
                        f"line {lineno}: count {count!r} is not an integer") from None
                if n < 0:
                    raise DataFormatError(f"line {lineno}: negative count in {token!r}")
                if term not in index:
                    index[term] = len(vocab)
                    vocab.append(term)
                doc[index[term]] = doc.get(index[term], 0.0) + n
            docs.append(doc)
    if not docs:
        raise DataFormatError(f"empty bag-of-words file: {path}")
    counts = np.zeros((len(docs), len(vocab)))
    for i, doc in enumerate(docs):
        for j, n in doc.items():
            counts[i, j] = n
    return BowCorpus(counts=counts, vocab=vocab, labels=np.array(labels, dtype=np.int64))


def frequency_filter(c: BowCorpus, lo: float = 4, hi: float = 70) -> BowCorpus:
    """Drop terms whose total count over the corpus is below lo or above hi."""
    if lo > hi:
        raise ValueError(f"frequency_filter requires lo <= hi, got {lo} > {hi}")
    totals = c.counts.sum(axis=0)
    keep = np.flatnonzero((totals >= lo) & (totals <= hi))
    if keep.size == 0:
        raise ValueError(
            f"frequency filter ({lo}, {hi}) removed every term")
    return BowCorpus(counts=c.counts[:, keep].copy(),
                     vocab=[c.vocab[j] for j in keep],
                     labels=c.labels.copy())


def _entropy_bits(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def information_gain(c: BowCorpus) -> np.ndarray:
    """IG of each term's presence indicator (count > 0) for the class label, in bits."""
    m = c.counts.shape[0]
    classes = np.unique(c.labels)
    class_counts = np.array([(c.labels == k).sum() for k in classes], dtype=np.float64)
    h_class = _entropy_bits(class_counts)

    present = (c.counts > 0).astype(np.float64)
    # per-class document counts with term present: (classes x terms)
    per_class_present = np.stack([present[c.labels == k].sum(axis=0) for k in classes])
    per_class_absent = class_counts[:, None] - per_class_present

    ig = np.empty(len(c.vocab))
    for j in range(len(c.vocab)):
        m1 = per_class_present[:, j].sum()
        m0 = m - m1
        h_cond = (m1 / m) * _entropy_bits(per_class_present[:, j]) \
            + (m0 / m) * _entropy_bits(per_class_absent[:, j])
        ig[j] = h_class - h_cond
    return ig


def info_gain_select(c: BowCorpus, k: int) -> BowCorpus:
    """Keep the k terms with the highest information gain.

    Columns come back in decreasing-gain order; ties resolve in favor of
    the earlier vocabulary position.
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if k > len(c.vocab):
        raise ValueError(f"k={k} exceeds vocabulary size {len(c.vocab)}")
    ig = information_gain(c)
    keep = sorted(range(len(c.vocab)), key=lambda j: (-ig[j], j))[:k]
    return BowCorpus(counts=c.counts[:, keep].copy(),
                     vocab=[c.vocab[j] for j in keep],
                     labels=c.labels.copy())


def bow_to_dataset(c: BowCorpus) -> Dataset:
    """Scale each document by its own maximum count into [0, 1]."""
    maxima = c.counts.max(axis=1, keepdims=True)
    scale = np.where(maxima > 0, maxima, 1.0)
    return Dataset(x=c.counts / scale, labels=c.labels.copy())
