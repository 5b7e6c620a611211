"""Dataset ingestion, normalization, and synthetic generators.

Two text formats are supported and documented bit-exactly in
docs/FORMATS.md: delimited CSV (optional header, configurable delimiter)
and the sparse ``label index:value`` format with 1-based indices. Labels
are mapped to dense integers in first-seen order.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from . import seeding

__all__ = [
    "Dataset",
    "DataFormatError",
    "SYNTH_KINDS",
    "load_csv",
    "write_csv",
    "load_libsvm",
    "unit_normalize",
    "synth",
]

logger = logging.getLogger(__name__)

SYNTH_KINDS = ("annuli", "gaussian-blobs", "xor-grid")


class DataFormatError(ValueError):
    """Malformed input file; the message names the offending line."""


@dataclass(frozen=True)
class Dataset:
    """Row-major examples with dense integer labels in [0, k)."""

    X: np.ndarray
    y: np.ndarray
    k: int
    feature_names: tuple[str, ...] | None = None
    class_names: tuple[str, ...] | None = None
    zero_rows: int = 0  # rows left untouched by the last normalization

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] < 1:
            raise ValueError(f"X must be a nonempty 2-d matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite entries")
        if y.shape != (X.shape[0],):
            raise ValueError("one label per row required")
        if self.k < 1 or y.min() < 0 or y.max() >= self.k:
            raise ValueError(f"labels must lie in [0, {self.k})")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


def _map_labels(raw: list[str]):
    """First-seen-order mapping of raw label tokens to [0, k)."""
    seen: dict[str, int] = {}
    y = np.empty(len(raw), dtype=np.int64)
    for i, token in enumerate(raw):
        if token not in seen:
            seen[token] = len(seen)
        y[i] = seen[token]
    return y, tuple(seen)


def _parse_feature(token: str, lineno: int, path) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DataFormatError(f"{path}:{lineno}: non-numeric feature value {token!r}") from None
    if not np.isfinite(value):
        raise DataFormatError(f"{path}:{lineno}: non-finite feature value {token!r}")
    return value


def load_csv(path, label_column: int | str = -1, has_header: bool = False,
             delimiter: str = ",") -> Dataset:
    """Load a delimited text file; one column holds the class label.

    ``label_column`` is a zero-based index (negative counts from the end)
    or, when a header is present, a column name.
    """
    rows = []
    header = None
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            if has_header and header is None:
                header = [c.strip() for c in row]
                continue
            rows.append((lineno, [c.strip() for c in row]))
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    width = len(rows[0][1])
    if isinstance(label_column, str):
        if header is None:
            raise DataFormatError(f"{path}: label column {label_column!r} needs a header")
        try:
            label_idx = header.index(label_column)
        except ValueError:
            raise DataFormatError(f"{path}: no column named {label_column!r}") from None
    else:
        label_idx = label_column % width
    features = np.empty((len(rows), width - 1))
    raw_labels = []
    for r, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise DataFormatError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
        raw_labels.append(row[label_idx])
        cells = row[:label_idx] + row[label_idx + 1:]
        for j, token in enumerate(cells):
            features[r, j] = _parse_feature(token, lineno, path)
    y, class_names = _map_labels(raw_labels)
    feature_names = None
    if header is not None:
        feature_names = tuple(header[:label_idx] + header[label_idx + 1:])
    return Dataset(features, y, len(class_names), feature_names, class_names)


def write_csv(ds: Dataset, path, delimiter: str = ",") -> None:
    """Write a dataset back out: feature columns then the label column.

    Floats use shortest round-trip formatting, so load_csv(write_csv(ds))
    reproduces the numeric content exactly.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        if ds.feature_names is not None:
            writer.writerow(list(ds.feature_names) + ["label"])
        for i in range(ds.n):
            label = ds.class_names[ds.y[i]] if ds.class_names else str(int(ds.y[i]))
            writer.writerow([repr(float(v)) for v in ds.X[i]] + [label])


def load_libsvm(path) -> Dataset:
    """Load sparse ``label index:value`` lines; indices are 1-based.

    The dense width is the largest index seen. Duplicate indices within a
    line and indices < 1 are rejected.
    """
    entries = []
    raw_labels = []
    max_idx = 0
    try:
        fh = open(path)
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            raw_labels.append(tokens[0])
            seen_idx = set()
            pairs = []
            for token in tokens[1:]:
                idx_str, sep, val_str = token.partition(":")
                if not sep:
                    raise DataFormatError(f"{path}:{lineno}: malformed pair {token!r}")
                try:
                    idx = int(idx_str)
                except ValueError:
                    raise DataFormatError(f"{path}:{lineno}: malformed pair {token!r}") from None
                if idx < 1:
                    raise DataFormatError(f"{path}:{lineno}: index {idx} must be >= 1")
                if idx in seen_idx:
                    raise DataFormatError(f"{path}:{lineno}: duplicate index {idx}")
                seen_idx.add(idx)
                pairs.append((idx - 1, _parse_feature(val_str, lineno, path)))
                max_idx = max(max_idx, idx)
            entries.append(pairs)
    if not entries:
        raise DataFormatError(f"{path}: no data rows")
    if max_idx == 0:
        raise DataFormatError(f"{path}: no features found in any row")
    X = np.zeros((len(entries), max_idx))
    for r, pairs in enumerate(entries):
        for j, v in pairs:
            X[r, j] = v
    y, class_names = _map_labels(raw_labels)
    return Dataset(X, y, len(class_names), None, class_names)


def unit_normalize(ds: Dataset) -> Dataset:
    """Scale every row to unit Euclidean norm.

    All-zero rows are left as zero (the kernel stays well-defined on them);
    their count is recorded on the returned dataset and logged.
    """
    norms = np.linalg.norm(ds.X, axis=1, keepdims=True)
    zero = norms[:, 0] == 0
    zero_count = int(np.count_nonzero(zero))
    if zero_count:
        logger.warning("unit_normalize: %d all-zero row(s) left unnormalized", zero_count)
    safe = np.where(zero[:, None], 1.0, norms)
    return Dataset(ds.X / safe, ds.y, ds.k, ds.feature_names, ds.class_names, zero_count)


def _balanced_counts(n: int, k: int) -> np.ndarray:
    counts = np.full(k, n // k, dtype=np.int64)
    counts[: n % k] += 1
    return counts


def synth(kind: str, n: int, d: int, k: int, noise: float, seed: int = 0) -> Dataset:
    """Deterministic synthetic dataset with classes balanced within one.

    Kinds: ``annuli`` (concentric rings in the first two dims, radius
    (i+1)/k for class i), ``gaussian-blobs`` (unit-norm random centroids
    plus isotropic noise), ``xor-grid`` (a k x k checkerboard of cells in
    the first two dims, cell (a, b) labeled (a + b) mod k).
    """
    if kind not in SYNTH_KINDS:
        raise ValueError(f"unknown synthetic kind {kind!r}; expected one of {SYNTH_KINDS}")
    if n < 1 or d < 1 or k < 1:
        raise ValueError("n, d, k must be positive")
    if noise < 0:
        raise ValueError(f"noise must be nonnegative, got {noise}")
    if kind in ("annuli", "xor-grid") and d < 2:
        raise ValueError(f"{kind} requires d >= 2")
    rng = seeding.substream(seed, seeding.DATA)
    counts = _balanced_counts(n, k)
    X = np.zeros((n, d))
    y = np.empty(n, dtype=np.int64)
    row = 0
    if kind == "gaussian-blobs":
        centers = rng.standard_normal((k, d))
        centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    for cls in range(k):
        m = int(counts[cls])
        block = slice(row, row + m)
        y[block] = cls
        if kind == "annuli":
            radius = (cls + 1) / k
            theta = rng.uniform(0.0, 2.0 * np.pi, size=m)
            X[block, 0] = radius * np.cos(theta)
            X[block, 1] = radius * np.sin(theta)
            X[block] += noise * rng.standard_normal((m, d))
        elif kind == "gaussian-blobs":
            X[block] = centers[cls] + noise * rng.standard_normal((m, d))
        else:  # xor-grid
            cells = np.arange(k)  # cell columns a with (a + b) mod k == cls, one per row b
            b = cells[rng.integers(0, k, size=m)]
            a = (cls - b) % k
            width = 2.0 / k
            X[block, 0] = -1.0 + (a + rng.uniform(0.0, 1.0, size=m)) * width
            X[block, 1] = -1.0 + (b + rng.uniform(0.0, 1.0, size=m)) * width
            X[block] += noise * rng.standard_normal((m, d))
        row += m
    order = rng.permutation(n)
    return Dataset(X[order], y[order], k)
