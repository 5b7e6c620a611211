"""Fast Walsh-Hadamard transform and the subsampled randomized variant.

Convention: the core transform is the *unnormalized* Sylvester Hadamard
matrix (H_1 = [[1, 1], [1, -1]], H_2m = [[H_m, H_m], [H_m, -H_m]]), so
applying it twice multiplies a vector by its length. All normalization is
carried by explicit scale factors on the operators built on top -- there
are no hidden sqrt(n) factors anywhere in the library.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "is_pow2",
    "next_pow2",
    "fwht_in_place",
    "pad_pow2",
    "SrhtOperator",
    "random_srht",
    "srht_apply",
    "srht_apply_batch",
]


def is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_pow2(n: int) -> int:
    """Smallest power of two >= n."""
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    return 1 << (n - 1).bit_length()


def fwht_in_place(v: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis, in place.

    Iterative radix-2 butterflies, O(n log n) per vector. Accepts a vector
    or a stack of vectors; the last-axis length must be a power of two
    (length 1 is a no-op). The argument is mutated and also returned.
    """
    v = np.asanyarray(v)
    n = v.shape[-1]
    if not is_pow2(n):
        raise ValueError(f"transform length must be a power of two, got {n}")
    if n == 1:
        return v
    # Butterflies need a contiguous buffer; copy in and back out if the
    # caller handed us a strided view.
    work = v if v.flags.c_contiguous else np.ascontiguousarray(v)
    flat = work.reshape(-1, n)
    h = 1
    while h < n:
        blocks = flat.reshape(-1, n // (2 * h), 2, h)
        lo = blocks[:, :, 0, :]
        hi = blocks[:, :, 1, :]
        tmp = lo - hi
        lo += hi
        hi[...] = tmp
        h *= 2
    if work is not v:
        v[...] = work
    return v


def pad_pow2(x: np.ndarray) -> np.ndarray:
    """Zero-pad a vector (or rows of a matrix) to the next power of two.

    Returns the input itself when the last-axis length is already a power
    of two.
    """
    x = np.asanyarray(x)
    d = x.shape[-1]
    target = next_pow2(d)
    if target == d:
        return x
    out = np.zeros(x.shape[:-1] + (target,), dtype=np.result_type(x, np.float64))
    out[..., :d] = x
    return out


@dataclass(frozen=True)
class SrhtOperator:
    """Sample rows of a randomly signed Hadamard matrix: scale * S * H * M.

    Applies x -> scale * (H @ (signs * x))[sample_indices], where H is the
    unnormalized Hadamard matrix of size dim_in_padded, M the sign diagonal
    and S the row subsampler. With scale = 1/sqrt(len(sample_indices)) the
    operator preserves inner products in expectation.
    """

    dim_in_padded: int
    signs: np.ndarray
    sample_indices: np.ndarray
    scale: float

    def __post_init__(self) -> None:
        if not is_pow2(self.dim_in_padded):
            raise ValueError(f"dim_in_padded must be a power of two, got {self.dim_in_padded}")
        signs = np.asarray(self.signs, dtype=np.float64)
        if signs.shape != (self.dim_in_padded,) or not np.all(np.abs(signs) == 1.0):
            raise ValueError("signs must be a +/-1 vector of length dim_in_padded")
        idx = np.asarray(self.sample_indices, dtype=np.int64)
        if idx.ndim != 1 or idx.size < 1:
            raise ValueError("sample_indices must be a nonempty index vector")
        if np.unique(idx).size != idx.size:
            raise ValueError("sample_indices must be distinct")
        if idx.min() < 0 or idx.max() >= self.dim_in_padded:
            raise ValueError("sample_indices out of range")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "sample_indices", idx)

    @property
    def dim_out(self) -> int:
        return self.sample_indices.size

    def dense(self) -> np.ndarray:
        """Materialize the (dim_out, dim_in_padded) matrix; for tests and tiny sizes."""
        H = fwht_in_place(np.eye(self.dim_in_padded))  # columns e_j -> H e_j; H symmetric
        return self.scale * (H * self.signs[None, :])[self.sample_indices]


def random_srht(dim_in_padded: int, dim_out: int, rng: np.random.Generator,
                scale: float | None = None) -> SrhtOperator:
    """Draw an operator with random signs and dim_out distinct sample rows.

    Default scale 1/sqrt(dim_out) makes it an approximate isometry in
    expectation. Sampling is without replacement.
    """
    if not 1 <= dim_out <= dim_in_padded:
        raise ValueError(f"need 1 <= dim_out <= dim_in_padded, got {dim_out} vs {dim_in_padded}")
    signs = (rng.integers(0, 2, size=dim_in_padded) * 2 - 1).astype(np.float64)
    indices = rng.choice(dim_in_padded, size=dim_out, replace=False)
    if scale is None:
        scale = 1.0 / np.sqrt(dim_out)
    return SrhtOperator(dim_in_padded, signs, np.sort(indices), scale)


def srht_apply(op: SrhtOperator, x: np.ndarray) -> np.ndarray:
    """Apply the operator to one vector of length dim_in_padded."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (op.dim_in_padded,):
        raise ValueError(f"expected length {op.dim_in_padded}, got shape {x.shape}")
    y = op.signs * x  # fresh buffer; the caller's vector is untouched
    fwht_in_place(y)
    return op.scale * y[op.sample_indices]


def srht_apply_batch(op: SrhtOperator, X: np.ndarray) -> np.ndarray:
    """Apply the operator to every row of an (m, dim_in_padded) matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != op.dim_in_padded:
        raise ValueError(f"expected (m, {op.dim_in_padded}) input, got shape {X.shape}")
    Y = X * op.signs[None, :]
    fwht_in_place(Y)
    return op.scale * Y[:, op.sample_indices]
