"""Reconstruction, spectrum, and classification diagnostics.

nrms here is the relative Frobenius error between an approximate and an
exact kernel matrix -- symmetric, unitless, and invariant under joint
rescaling. Numerical rank counts singular values above a relative
threshold; spectra are computed on feature matrices where available (the
nonzero spectrum matches the kernel-matrix route).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .kernels import PolyKernelParams, gram_matrix
from .learner import TrainedModel
from .rfm import apply_rfm_batch, build_rfm

__all__ = [
    "GramApproxReport",
    "SpectrumReport",
    "nrms_error",
    "scree",
    "weight_histogram",
    "classification_error",
    "decay_study",
]

DEFAULT_RANK_THRESHOLD = 1e-8


@dataclass(frozen=True)
class GramApproxReport:
    """Reconstruction errors of one method at one (D, E) configuration."""

    method: str
    D: int
    E: int
    nrms: float
    trials: int
    values: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        values = np.asarray(self.values if self.values is not None else [self.nrms],
                            dtype=np.float64)
        if values.shape != (self.trials,):
            raise ValueError(f"expected {self.trials} per-trial values, got {values.shape}")
        if self.nrms < 0 or np.any(values < 0):
            raise ValueError("nrms values must be nonnegative")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class SpectrumReport:
    """Singular values in descending order plus the numerical rank."""

    singular_values: np.ndarray
    numerical_rank: int
    threshold: float

    def __post_init__(self) -> None:
        s = np.asarray(self.singular_values, dtype=np.float64)
        if np.any(s < 0) or np.any(np.diff(s) > 0):
            raise ValueError("singular values must be nonnegative and nonincreasing")
        if not 0 <= self.numerical_rank <= s.size:
            raise ValueError("rank out of range")
        object.__setattr__(self, "singular_values", s)


def nrms_error(G_exact, G_approx) -> float:
    """Relative Frobenius reconstruction error ||A - G||_F / ||G||_F."""
    G_exact = np.asarray(G_exact, dtype=np.float64)
    G_approx = np.asarray(G_approx, dtype=np.float64)
    if G_exact.shape != G_approx.shape:
        raise ValueError(f"shape mismatch: {G_exact.shape} vs {G_approx.shape}")
    denom = np.linalg.norm(G_exact)
    if denom == 0:
        raise ValueError("exact matrix has zero norm; nrms is undefined")
    return float(np.linalg.norm(G_approx - G_exact) / denom)


def scree(F, threshold_factor: float = DEFAULT_RANK_THRESHOLD) -> SpectrumReport:
    """Singular values of a feature matrix and its numerical rank.

    Rank counts values above threshold_factor times the largest one.
    """
    F = np.asarray(F, dtype=np.float64)
    if F.ndim != 2 or F.size == 0:
        raise ValueError(f"expected a nonempty 2-d matrix, got shape {F.shape}")
    if not np.all(np.isfinite(F)):
        raise ValueError("matrix contains non-finite entries")
    s = np.linalg.svd(F, compute_uv=False)
    rank = int(np.count_nonzero(s > s[0] * threshold_factor)) if s[0] > 0 else 0
    return SpectrumReport(s, rank, float(threshold_factor))


def weight_histogram(W, bins: int):
    """Histogram of learned weight entries over [min, max].

    Returns (counts, bin_edges); counts sum to W.size.
    """
    if bins < 1:
        raise ValueError(f"need at least one bin, got {bins}")
    W = np.asarray(W, dtype=np.float64)
    counts, edges = np.histogram(W.ravel(), bins=bins)
    return counts, edges


def classification_error(model: TrainedModel, X, y) -> float:
    """Fraction of misclassified examples after featurize -> decode."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("test set must be a nonempty (n, d) matrix")
    if y.shape != (X.shape[0],):
        raise ValueError("one label per test row required")
    k = model.ecoc.codebook.k
    if y.min() < 0 or y.max() >= k:
        raise ValueError(f"labels must lie in [0, {k})")
    return float(np.mean(model.predict(X) != y))


def decay_study(d: int, params: PolyKernelParams, dims, n: int, trials: int,
                seed: int = 0, p: float = 2.0) -> list[GramApproxReport]:
    """Median reconstruction error of direct feature maps across output dims.

    Fixes n random unit points, then for each requested dimension builds
    ``trials`` independent maps and reports the median nrms against the
    exact kernel matrix of those points.
    """
    dims = [int(D) for D in dims]
    if any(b <= a for a, b in zip(dims, dims[1:])):
        raise ValueError("dims must be strictly ascending")
    if trials < 1 or n < 1:
        raise ValueError("n and trials must be positive")
    rng = seeding.substream(seed, seeding.DATA)
    X = rng.standard_normal((n, d))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    G = gram_matrix(X, params)
    reports = []
    for di, D in enumerate(dims):
        vals = []
        for t in range(trials):
            mseed = seeding.child_seed(seed, seeding.TRIAL, di * trials + t)
            F = apply_rfm_batch(build_rfm(d, D, params, p, mseed), X)
            A = F @ F.T
            vals.append(nrms_error(G, (A + A.T) * 0.5))
        vals = np.asarray(vals)
        reports.append(GramApproxReport("rfm", D, D, float(np.median(vals)), trials, vals))
    return reports
