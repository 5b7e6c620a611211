"""Exact polynomial kernel evaluation and its power-series expansion.

The kernel family is K(x, y) = (<x, y> + q)^r with integer offset q >= 0 and
integer degree r >= 1. Everything downstream (random feature maps, their
compact compositions, reconstruction metrics) is measured against the exact
values computed here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PolyKernelParams",
    "MaclaurinCoeffs",
    "eval_kernel",
    "gram_matrix",
    "maclaurin_coeffs",
]


@dataclass(frozen=True)
class PolyKernelParams:
    """Parameters of the polynomial kernel (<x, y> + q)^r.

    Only integer degrees are supported: a fractional degree would have an
    unbounded expansion and is rejected at construction.
    """

    q: int
    r: int

    def __post_init__(self) -> None:
        if self.q != int(self.q) or self.q < 0:
            raise ValueError(f"kernel offset q must be a nonnegative integer, got {self.q!r}")
        if self.r != int(self.r) or self.r < 1:
            raise ValueError(f"kernel degree r must be a positive integer, got {self.r!r}")
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "r", int(self.r))


@dataclass(frozen=True)
class MaclaurinCoeffs:
    """Coefficients a[n] of the kernel profile f(t) = sum_n a[n] * t^n."""

    a: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=np.float64)
        if a.ndim != 1 or a.size < 1:
            raise ValueError("coefficient vector must be one-dimensional and nonempty")
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise ValueError("coefficients must be finite and nonnegative")
        object.__setattr__(self, "a", a)

    @property
    def degree(self) -> int:
        return self.a.size - 1

    def coeff(self, n: int) -> float:
        """a[n], extended by zero beyond the kernel degree."""
        return float(self.a[n]) if 0 <= n <= self.degree else 0.0


def _as_vector(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a one-dimensional vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def eval_kernel(x, y, params: PolyKernelParams) -> float:
    """Exact kernel value (<x, y> + q)^r.

    The dot product is accumulated in the widest precision the platform
    offers because the r-th power amplifies rounding in the base.
    """
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    dot = np.dot(x.astype(np.longdouble), y.astype(np.longdouble))
    return float((dot + params.q) ** params.r)


def gram_matrix(X, params: PolyKernelParams) -> np.ndarray:
    """Exact kernel matrix G[i, j] = K(row i, row j) for the rows of X.

    Computed as an elementwise power of the (symmetrized) dot-product
    matrix; the output is exactly symmetric.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"X must be a nonempty 2-d matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite entries")
    S = X @ X.T
    S = (S + S.T) * 0.5  # blocked matmul output is not guaranteed bitwise symmetric
    return (S + params.q) ** params.r


def maclaurin_coeffs(params: PolyKernelParams) -> MaclaurinCoeffs:
    """Expansion coefficients of (t + q)^r: a[n] = binom(r, n) * q^(r - n).

    Built by descending ratio updates from a[r] = 1, so every intermediate
    stays representable even when the binomials or the powers of q would
    individually overflow an integer type.
    """
    q, r = params.q, params.r
    a = np.zeros(r + 1)
    a[r] = 1.0
    for n in range(r, 0, -1):
        a[n - 1] = a[n] * n / (r - n + 1) * q
    return MaclaurinCoeffs(a)
