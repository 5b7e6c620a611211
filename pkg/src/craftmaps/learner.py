"""Single-pass multi-class training: codeword regression on a shared Hessian.

Each of the k classes gets a +/-1 codeword of length c; c ridge regressors
are fit jointly from one Hessian Z'Z and c gradient columns, accumulated in
a single pass over (shardable, mergeable) feature blocks. Decoding assigns
the class whose codeword is nearest to the real-valued score vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import seeding
from .craftmap import CraftMapModel, apply_craftmap_batch
from .rfm import RfmModel, SrhtRfmModel, apply_rfm_batch, apply_srht_rfm_batch

__all__ = [
    "CodeBook",
    "RidgeAccumulator",
    "EcocModel",
    "TrainedModel",
    "DEFAULT_LAMBDA_GRID",
    "make_codebook",
    "new_accumulator",
    "accumulate",
    "merge",
    "solve",
    "select_lambda",
    "decision_scores",
    "predict",
    "predict_batch",
]

DEFAULT_LAMBDA_GRID = tuple(np.logspace(-6, 2, 8))

_CODEBOOK_MAX_TRIES = 1000


@dataclass(frozen=True)
class CodeBook:
    """k distinct +/-1 codewords of length c, no constant column."""

    k: int
    c: int
    codes: np.ndarray

    def __post_init__(self) -> None:
        codes = np.asarray(self.codes, dtype=np.float64)
        if codes.shape != (self.k, self.c):
            raise ValueError(f"codes must be ({self.k}, {self.c}), got {codes.shape}")
        if not np.all(np.abs(codes) == 1.0):
            raise ValueError("codewords must be +/-1 valued")
        if np.unique(codes, axis=0).shape[0] != self.k:
            raise ValueError("codewords must be pairwise distinct")
        if self.k >= 2 and (np.any(np.all(codes == 1, axis=0)) or np.any(np.all(codes == -1, axis=0))):
            raise ValueError("every code column must carry both signs")
        object.__setattr__(self, "codes", codes)


def make_codebook(k: int, c: int, seed: int = 0) -> CodeBook:
    """Random balanced-column codebook, rejection-sampled to distinct rows.

    Each column is a shuffle of floor(k/2) minus-ones and the rest plus-ones,
    which guarantees mixed signs; full matrices are redrawn until the rows
    are pairwise distinct.
    """
    if k < 2:
        raise ValueError(f"codebooks require at least 2 classes, got k={k}")
    if c < math.ceil(math.log2(k)):
        raise ValueError(f"code length {c} cannot give {k} distinct codewords "
                         f"(need at least {math.ceil(math.log2(k))})")
    rng = seeding.substream(seed, seeding.CODEBOOK)
    base = np.ones(k)
    base[: k // 2] = -1.0
    for _ in range(_CODEBOOK_MAX_TRIES):
        codes = np.stack([rng.permutation(base) for _ in range(c)], axis=1)
        if np.unique(codes, axis=0).shape[0] == k:
            return CodeBook(k, c, codes)
    raise ValueError(f"could not draw {k} distinct codewords of length {c} "
                     f"in {_CODEBOOK_MAX_TRIES} attempts")


@dataclass
class RidgeAccumulator:
    """Streaming sufficient statistics: H = sum z z', B = sum z code(y)'.

    Accumulators over disjoint data shards merge by entrywise addition, so
    they are the unit of parallelism for single-pass training.
    """

    codebook: CodeBook
    dim: int
    H: np.ndarray = field(default=None)
    B: np.ndarray = field(default=None)
    count: int = 0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("feature dimension must be positive")
        if self.H is None:
            self.H = np.zeros((self.dim, self.dim))
        if self.B is None:
            self.B = np.zeros((self.dim, self.codebook.c))
        if self.H.shape != (self.dim, self.dim) or self.B.shape != (self.dim, self.codebook.c):
            raise ValueError("accumulator matrices have inconsistent shapes")


def new_accumulator(dim: int, codebook: CodeBook) -> RidgeAccumulator:
    return RidgeAccumulator(codebook, dim)


def accumulate(acc: RidgeAccumulator, Z, y) -> RidgeAccumulator:
    """Fold a feature block into the accumulator (mutates and returns it)."""
    Z = np.asarray(Z, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if Z.ndim != 2 or Z.shape[1] != acc.dim:
        raise ValueError(f"expected (m, {acc.dim}) features, got shape {Z.shape}")
    if y.shape != (Z.shape[0],):
        raise ValueError("one label per feature row required")
    if Z.shape[0] == 0:
        return acc
    if y.min() < 0 or y.max() >= acc.codebook.k:
        raise ValueError(f"labels must lie in [0, {acc.codebook.k}), got range "
                         f"[{y.min()}, {y.max()}]")
    acc.H += Z.T @ Z
    acc.B += Z.T @ acc.codebook.codes[y]
    acc.count += Z.shape[0]
    return acc


def merge(a: RidgeAccumulator, b: RidgeAccumulator) -> RidgeAccumulator:
    """Combine two shard accumulators into a fresh one."""
    if a.dim != b.dim:
        raise ValueError(f"accumulator dimension mismatch: {a.dim} vs {b.dim}")
    if a.codebook.k != b.codebook.k or not np.array_equal(a.codebook.codes, b.codebook.codes):
        raise ValueError("accumulators are bound to different codebooks")
    out = RidgeAccumulator(a.codebook, a.dim, a.H + b.H, a.B + b.B, a.count + b.count)
    return out


@dataclass(frozen=True)
class EcocModel:
    """Trained codeword regressors: scores(z) = W' z, one column per codebit."""

    codebook: CodeBook
    W: np.ndarray
    lam: float

    def __post_init__(self) -> None:
        W = np.asarray(self.W, dtype=np.float64)
        if W.ndim != 2 or W.shape[1] != self.codebook.c:
            raise ValueError(f"W must be (E, {self.codebook.c}), got {W.shape}")
        if not self.lam > 0:
            raise ValueError(f"regularizer must be positive, got {self.lam}")
        object.__setattr__(self, "W", W)

    @property
    def dim(self) -> int:
        return self.W.shape[0]


def solve(acc: RidgeAccumulator, lam: float) -> EcocModel:
    """Ridge solve W = (H + lam I)^-1 B.

    One symmetric positive-definite factorization is shared across all c
    right-hand sides.
    """
    if not lam > 0:
        raise ValueError(f"regularizer must be positive, got {lam}")
    if not (np.all(np.isfinite(acc.H)) and np.all(np.isfinite(acc.B))):
        raise ValueError("accumulator contains non-finite entries")
    A = acc.H + lam * np.eye(acc.dim)
    try:
        factor = scipy.linalg.cho_factor(A, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise ValueError(f"ridge system factorization failed: {exc}") from exc
    W = scipy.linalg.cho_solve(factor, acc.B, check_finite=False)
    return EcocModel(acc.codebook, W, float(lam))


def decision_scores(model: EcocModel, Z) -> np.ndarray:
    """Real-valued codebit scores, one row per example."""
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] != model.dim:
        raise ValueError(f"expected (n, {model.dim}) features, got shape {Z.shape}")
    return Z @ model.W


def _nearest_codeword(scores: np.ndarray, codes: np.ndarray) -> np.ndarray:
    # ||s - code||^2 expanded; ties resolve to the lowest class index.
    d2 = (scores * scores).sum(axis=1, keepdims=True) \
        - 2.0 * scores @ codes.T + (codes * codes).sum(axis=1)[None, :]
    return np.argmin(d2, axis=1).astype(np.int64)


def predict_batch(model: EcocModel, Z) -> np.ndarray:
    """Decode every row of a feature block to a class index."""
    return _nearest_codeword(decision_scores(model, Z), model.codebook.codes)


def predict(model: EcocModel, z) -> int:
    """Decode a single feature vector to a class index."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (model.dim,):
        raise ValueError(f"expected a vector of length {model.dim}, got shape {z.shape}")
    return int(predict_batch(model, z[None, :])[0])


def select_lambda(features, labels, codebook: CodeBook, folds: int = 5,
                  grid=DEFAULT_LAMBDA_GRID, seed: int = 0) -> float:
    """Pick one regularizer for all codebits by k-fold cross-validation.

    Returns the grid value with the lowest mean held-out classification
    error; ties break toward the smaller value. Deterministic given the
    fold seed. Each training split must contain every class.
    """
    Z = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if Z.ndim != 2 or y.shape != (Z.shape[0],):
        raise ValueError("features must be (n, E) with one label per row")
    if folds < 2:
        raise ValueError(f"cross-validation needs at least 2 folds, got {folds}")
    grid = np.asarray(list(grid), dtype=np.float64)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("lambda grid must be nonempty and positive")
    n = Z.shape[0]
    if folds > n:
        raise ValueError(f"cannot split {n} examples into {folds} folds")
    order = seeding.substream(seed, seeding.FOLDS).permutation(n)
    fold_idx = np.array_split(order, folds)
    errors = np.zeros(grid.size)
    for f, val in enumerate(fold_idx):
        train = np.concatenate([fold_idx[g] for g in range(folds) if g != f])
        present = np.unique(y[train])
        if present.size < codebook.k:
            missing = sorted(set(range(codebook.k)) - set(present.tolist()))
            raise ValueError(f"degenerate folds: training split for fold {f} is missing "
                             f"class(es) {missing}; use fewer folds or more data")
        acc = accumulate(new_accumulator(Z.shape[1], codebook), Z[train], y[train])
        for j, lam in enumerate(grid):
            model = solve(acc, lam)
            errors[j] += float(np.mean(predict_batch(model, Z[val]) != y[val]))
    errors /= folds
    best = np.lexsort((grid, errors))[0]
    return float(grid[best])


@dataclass(frozen=True)
class TrainedModel:
    """A feature map bound to its trained codeword regressors.

    ``feature_map`` may be None, in which case raw inputs are the features
    (the linear baseline).
    """

    feature_map: CraftMapModel | RfmModel | SrhtRfmModel | None
    ecoc: EcocModel

    def featurize(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.feature_map is None:
            if X.ndim != 2 or X.shape[1] != self.ecoc.dim:
                raise ValueError(f"expected (n, {self.ecoc.dim}) inputs, got shape {X.shape}")
            return X
        if isinstance(self.feature_map, CraftMapModel):
            return apply_craftmap_batch(self.feature_map, X)
        if isinstance(self.feature_map, RfmModel):
            return apply_rfm_batch(self.feature_map, X)
        return apply_srht_rfm_batch(self.feature_map, X)

    def predict(self, X) -> np.ndarray:
        return predict_batch(self.ecoc, self.featurize(X))
