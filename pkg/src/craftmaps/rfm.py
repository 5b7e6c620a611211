"""Random feature maps for polynomial kernels (the nonlinear up-projection).

Each output coordinate estimates one term of the kernel's power-series
expansion: a degree N is drawn from a decaying distribution, the coordinate
value is the product of N Rademacher projections of the input, and an
importance weight sqrt(a_N / P[N]) makes the inner product of two feature
vectors an unbiased estimate of the kernel.

Two backends produce the Rademacher projections:

* explicit +/-1 weight vectors (dense mode, one BLAS product per batch);
* rows of randomly signed, randomly permuted Hadamard blocks (structured
  mode, O(log d) work per projection instead of O(d)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .hadamard import fwht_in_place, next_pow2, pad_pow2
from .kernels import MaclaurinCoeffs, PolyKernelParams, maclaurin_coeffs

__all__ = [
    "DegreeSampler",
    "RfmModel",
    "SrhtRfmModel",
    "sample_degree",
    "sample_degrees",
    "build_rfm",
    "apply_rfm",
    "apply_rfm_batch",
    "build_srht_rfm",
    "apply_srht_rfm",
    "apply_srht_rfm_batch",
]

# Regenerate at most this many weight entries at a time in storage-light mode.
_REGEN_CHUNK_ENTRIES = 1 << 21


@dataclass(frozen=True)
class DegreeSampler:
    """Distribution of the per-coordinate monomial degree N.

    Truncated mode renormalizes the decaying weights p^-(n+1) over the
    support {0, ..., r} (the expansion of an integer-degree kernel has no
    terms beyond r, so mass outside would be wasted on all-zero features).
    Untruncated mode is the geometric law P[N = n] = 2^-(n+1) on all of N0;
    only p = 2 makes those weights sum to one, so other p are rejected.
    """

    p: float
    r: int
    truncated: bool = True
    probs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.r < 0:
            raise ValueError(f"max degree must be nonnegative, got {self.r}")
        n = np.arange(self.r + 1)
        if self.truncated:
            if not (np.isfinite(self.p) and self.p > 1):
                raise ValueError(f"truncated sampling requires p > 1, got {self.p}")
            w = float(self.p) ** -(n + 1.0)
            probs = w / w.sum()
        else:
            if self.p != 2:
                raise ValueError("untruncated sampling is only normalizable at p = 2")
            probs = 2.0 ** -(n + 1.0)
        object.__setattr__(self, "probs", probs)

    def mass(self, degrees) -> np.ndarray:
        """P[N = n] for each requested degree (valid beyond r when untruncated)."""
        degrees = np.asarray(degrees, dtype=np.int64)
        if self.truncated:
            if np.any((degrees < 0) | (degrees > self.r)):
                raise ValueError("degree outside truncated support")
            return self.probs[degrees]
        return 2.0 ** -(degrees + 1.0)


def sample_degrees(sampler: DegreeSampler, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` i.i.d. degrees from the sampler's law."""
    if sampler.truncated:
        return rng.choice(sampler.r + 1, size=size, p=sampler.probs).astype(np.int64)
    return (rng.geometric(0.5, size=size) - 1).astype(np.int64)


def sample_degree(sampler: DegreeSampler, rng: np.random.Generator) -> int:
    """Draw a single degree."""
    return int(sample_degrees(sampler, 1, rng)[0])


@dataclass(frozen=True)
class _DegreeGroup:
    """Columns of the projection matrix owned by the features of one degree."""

    degree: int
    feature_idx: np.ndarray  # features with this degree
    col_idx: np.ndarray      # their projection columns, feature-major


def _coerce_feature_arrays(model) -> None:
    object.__setattr__(model, "degrees", np.asarray(model.degrees, dtype=np.int64))
    object.__setattr__(model, "scales", np.asarray(model.scales, dtype=np.float64))
    object.__setattr__(model, "offsets", np.asarray(model.offsets, dtype=np.int64))


def _degree_groups(degrees: np.ndarray, offsets: np.ndarray) -> tuple[_DegreeGroup, ...]:
    groups = []
    for deg in np.unique(degrees):
        deg = int(deg)
        if deg == 0:
            continue
        feat = np.flatnonzero(degrees == deg)
        cols = (offsets[feat][:, None] + np.arange(deg)[None, :]).ravel()
        groups.append(_DegreeGroup(deg, feat, cols))
    return tuple(groups)


def _scales(degrees: np.ndarray, coeffs: MaclaurinCoeffs, sampler: DegreeSampler) -> np.ndarray:
    a = np.array([coeffs.coeff(n) for n in degrees])
    return np.sqrt(a / sampler.mass(degrees))


def _feature_weight_rows(seed: int, feature: int, n_rows: int, d: int) -> np.ndarray:
    """The +/-1 projection vectors of one feature, regenerated from the seed."""
    rng = seeding.substream(seed, seeding.WEIGHTS, feature)
    return (rng.integers(0, 2, size=(n_rows, d), dtype=np.int8) * 2 - 1).astype(np.float64)


@dataclass(frozen=True)
class RfmModel:
    """Dense-Rademacher feature map R^d -> R^D.

    ``weights`` stacks the +/-1 projection vectors of all features into one
    (sum N_i, d) matrix; feature i owns rows offsets[i]:offsets[i+1]. When
    ``weights`` is None (storage-light mode) the rows are regenerated from
    the seed on every application; ``materialize`` caches them. Both modes
    produce identical weight rows bit-for-bit.
    """

    d: int
    D: int
    params: PolyKernelParams
    sampler: DegreeSampler
    degrees: np.ndarray
    scales: np.ndarray
    offsets: np.ndarray
    seed: int
    weights: np.ndarray | None = None
    groups: tuple[_DegreeGroup, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if self.d < 1 or self.D < 1:
            raise ValueError("dimensions must be positive")
        _coerce_feature_arrays(self)
        if self.degrees.shape != (self.D,) or self.scales.shape != (self.D,):
            raise ValueError("degrees/scales must have one entry per feature")
        if self.offsets.shape != (self.D + 1,):
            raise ValueError("offsets must have D + 1 entries")
        if not self.groups:
            object.__setattr__(self, "groups", _degree_groups(self.degrees, self.offsets))

    @property
    def total_rows(self) -> int:
        return int(self.offsets[-1])

    def materialize(self) -> "RfmModel":
        """Cached-weights copy of this model (no-op if already materialized)."""
        if self.weights is not None:
            return self
        W = np.empty((self.total_rows, self.d))
        for i in range(self.D):
            lo, hi = int(self.offsets[i]), int(self.offsets[i + 1])
            if hi > lo:
                W[lo:hi] = _feature_weight_rows(self.seed, i, hi - lo, self.d)
        return RfmModel(self.d, self.D, self.params, self.sampler, self.degrees,
                        self.scales, self.offsets, self.seed, W, self.groups)


def build_rfm(d: int, D: int, params: PolyKernelParams, p: float = 2.0,
              seed: int = 0, truncated: bool = True, materialize: bool = True) -> RfmModel:
    """Sample a feature map: degrees, Rademacher weights, importance scales.

    Deterministic given the seed. ``materialize=False`` keeps the model
    storage-light; applications then regenerate weights on the fly.
    """
    if d < 1 or D < 1:
        raise ValueError(f"dimensions must be positive, got d={d}, D={D}")
    sampler = DegreeSampler(p, params.r, truncated)
    degrees = sample_degrees(sampler, D, seeding.substream(seed, seeding.DEGREES))
    offsets = np.concatenate([[0], np.cumsum(degrees)]).astype(np.int64)
    scales = _scales(degrees, maclaurin_coeffs(params), sampler)
    model = RfmModel(d, D, params, sampler, degrees, scales, offsets, seed)
    return model.materialize() if materialize else model


def _projections(model: RfmModel, X: np.ndarray) -> np.ndarray:
    """All Rademacher projections <w_ij, x>: an (n, sum N_i) matrix."""
    total = model.total_rows
    if model.weights is not None:
        return X @ model.weights.T
    # Storage-light: regenerate weight rows in bounded chunks of features.
    n = X.shape[0]
    proj = np.empty((n, total))
    chunk_rows = max(1, _REGEN_CHUNK_ENTRIES // max(model.d, 1))
    start = 0
    while start < model.D:
        stop = start
        while stop < model.D and model.offsets[stop + 1] - model.offsets[start] <= chunk_rows:
            stop += 1
        stop = max(stop, start + 1)
        lo, hi = int(model.offsets[start]), int(model.offsets[stop])
        if hi > lo:
            W = np.empty((hi - lo, model.d))
            for i in range(start, stop):
                a, b = int(model.offsets[i]), int(model.offsets[i + 1])
                if b > a:
                    W[a - lo:b - lo] = _feature_weight_rows(model.seed, i, b - a, model.d)
            proj[:, lo:hi] = X @ W.T
        start = stop
    return proj


def _assemble_features(proj: np.ndarray, model) -> np.ndarray:
    """Turn projection values into features: per-degree products, then scales."""
    n = proj.shape[0]
    out = np.ones((n, model.D))  # empty product: degree-0 features are 1
    for g in model.groups:
        vals = proj[:, g.col_idx].reshape(n, g.feature_idx.size, g.degree)
        out[:, g.feature_idx] = vals.prod(axis=2)
    out *= (model.scales / np.sqrt(model.D))[None, :]
    return out


def _check_batch(X, d: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != d:
        raise ValueError(f"expected (n, {d}) input, got shape {X.shape}")
    return X


def apply_rfm_batch(model: RfmModel, X) -> np.ndarray:
    """Map the rows of an (n, d) matrix to (n, D) feature vectors."""
    X = _check_batch(X, model.d)
    return _assemble_features(_projections(model, X), model)


def apply_rfm(model: RfmModel, x) -> np.ndarray:
    """Map a single d-vector to its D-dimensional feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.d,):
        raise ValueError(f"expected a vector of length {model.d}, got shape {x.shape}")
    return apply_rfm_batch(model, x[None, :])[0]


@dataclass(frozen=True)
class SrhtRfmModel:
    """Hadamard-structured feature map R^d -> R^D.

    The virtual weight matrix consists of T randomly signed Hadamard blocks
    of size d_padded; its T * d_padded rows are randomly permuted and the
    first sum N_i of them are consumed in feature order as the Rademacher
    projections of the dense construction.
    """

    d: int
    d_padded: int
    D: int
    params: PolyKernelParams
    sampler: DegreeSampler
    degrees: np.ndarray
    scales: np.ndarray
    offsets: np.ndarray
    seed: int
    T: int
    block_signs: np.ndarray   # (T, d_padded) +/-1
    permutation: np.ndarray   # permutation of T * d_padded row slots
    groups: tuple[_DegreeGroup, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        _coerce_feature_arrays(self)
        object.__setattr__(self, "block_signs", np.asarray(self.block_signs, dtype=np.int8))
        total = int(self.offsets[-1])
        slots = self.T * self.d_padded
        if self.T != -(-total // self.d_padded):
            raise ValueError("block count must be ceil(sum N_i / d_padded)")
        if self.block_signs.shape != (self.T, self.d_padded):
            raise ValueError("block_signs must be (T, d_padded)")
        perm = np.asarray(self.permutation, dtype=np.int64)
        if perm.shape != (slots,) or (slots and not np.array_equal(np.sort(perm), np.arange(slots))):
            raise ValueError("permutation must be a bijection of the row slots")
        object.__setattr__(self, "permutation", perm)
        if not self.groups:
            object.__setattr__(self, "groups", _degree_groups(self.degrees, self.offsets))

    @property
    def total_rows(self) -> int:
        return int(self.offsets[-1])


def build_srht_rfm(d: int, D: int, params: PolyKernelParams, p: float = 2.0,
                   seed: int = 0, truncated: bool = True) -> SrhtRfmModel:
    """Sample a Hadamard-structured feature map.

    Degrees come from the same substream as the dense builder, so the two
    constructions are degree-matched for a shared seed.
    """
    if d < 1 or D < 1:
        raise ValueError(f"dimensions must be positive, got d={d}, D={D}")
    sampler = DegreeSampler(p, params.r, truncated)
    degrees = sample_degrees(sampler, D, seeding.substream(seed, seeding.DEGREES))
    offsets = np.concatenate([[0], np.cumsum(degrees)]).astype(np.int64)
    scales = _scales(degrees, maclaurin_coeffs(params), sampler)
    d_padded = next_pow2(d)
    total = int(offsets[-1])
    T = -(-total // d_padded)
    signs_rng = seeding.substream(seed, seeding.BLOCK_SIGNS)
    block_signs = (signs_rng.integers(0, 2, size=(T, d_padded), dtype=np.int8) * 2 - 1)
    perm_rng = seeding.substream(seed, seeding.PERMUTATION)
    permutation = perm_rng.permutation(T * d_padded).astype(np.int64)
    return SrhtRfmModel(d, d_padded, D, params, sampler, degrees, scales,
                        offsets, seed, T, block_signs, permutation)


def apply_srht_rfm_batch(model: SrhtRfmModel, X) -> np.ndarray:
    """Map the rows of an (n, d) matrix to (n, D) feature vectors."""
    X = _check_batch(X, model.d)
    n = X.shape[0]
    total = model.total_rows
    if total == 0:
        proj = np.empty((n, 0))
    else:
        Xp = pad_pow2(X)
        # (n, T, d_padded): every signed copy of every example, transformed at once.
        prod = Xp[:, None, :] * model.block_signs[None, :, :].astype(np.float64)
        fwht_in_place(prod)
        concat = prod.reshape(n, model.T * model.d_padded)
        proj = concat[:, model.permutation[:total]]
    return _assemble_features(proj, model)


def apply_srht_rfm(model: SrhtRfmModel, x) -> np.ndarray:
    """Map a single d-vector to its D-dimensional feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.d,):
        raise ValueError(f"expected a vector of length {model.d}, got shape {x.shape}")
    return apply_srht_rfm_batch(model, x[None, :])[0]
