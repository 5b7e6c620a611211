"""Compact maps: a nonlinear up-projection composed with a random linear
down-projection.

The up stage expands to R^D to capture the kernel accurately; the down
stage compresses to R^E (E < D) with an inner-product-preserving random
projection, so training happens in a space a factor (D/E)^2 cheaper while
keeping most of the up stage's accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import seeding
from .hadamard import SrhtOperator, next_pow2, pad_pow2, random_srht, srht_apply, srht_apply_batch
from .kernels import PolyKernelParams
from .rfm import (
    RfmModel,
    SrhtRfmModel,
    apply_rfm,
    apply_rfm_batch,
    apply_srht_rfm,
    apply_srht_rfm_batch,
    build_rfm,
    build_srht_rfm,
)

__all__ = [
    "DOWN_KINDS",
    "UP_KINDS",
    "DownProjector",
    "CraftMapModel",
    "build_down_projector",
    "default_down_kind",
    "apply_down",
    "apply_down_batch",
    "build_craftmap",
    "apply_craftmap",
    "apply_craftmap_batch",
]

DOWN_KINDS = ("dense-rademacher", "dense-gaussian", "srht")
UP_KINDS = ("rfm", "rfm-srht")

# Dense wins below this output size, the O(D log D) transform above it.
_DENSE_DOWN_MAX_E = 4096

# Row-block budget for batch application, in float64 elements.
_BATCH_BLOCK_ELEMENTS = 1 << 23


@dataclass(frozen=True)
class DownProjector:
    """Linear random map R^D -> R^E with E[<Qu, Qv>] = <u, v>.

    Dense kinds hold an (E, D) matrix with entries +/-1/sqrt(E) (rademacher)
    or N(0, 1/E) (gaussian); the matrix is regenerable from the seed, and
    ``matrix`` is a cache filled by the explicit ``materialize`` step. The
    srht kind samples E rows of a signed Hadamard over the padded D.
    """

    kind: str
    D: int
    E: int
    seed: int
    matrix: np.ndarray | None = None
    op: SrhtOperator | None = None

    def __post_init__(self) -> None:
        if self.kind not in DOWN_KINDS:
            raise ValueError(f"unknown projector kind {self.kind!r}; expected one of {DOWN_KINDS}")
        if not 1 <= self.E < self.D:
            raise ValueError(f"down-projection requires 1 <= E < D, got E={self.E}, D={self.D}")
        if self.kind == "srht" and self.op is None:
            raise ValueError("srht projector requires its operator")

    def materialize(self) -> "DownProjector":
        """Copy of this projector with the dense matrix cached."""
        if self.kind == "srht" or self.matrix is not None:
            return self
        return DownProjector(self.kind, self.D, self.E, self.seed,
                             _regen_dense(self.kind, self.D, self.E, self.seed), None)


def _regen_dense(kind: str, D: int, E: int, seed: int) -> np.ndarray:
    rng = seeding.substream(seed, seeding.DOWN_PROJ)
    if kind == "dense-rademacher":
        Q = (rng.integers(0, 2, size=(E, D), dtype=np.int8) * 2 - 1).astype(np.float64)
    else:
        Q = rng.standard_normal((E, D))
    Q /= np.sqrt(E)
    return Q


def build_down_projector(D: int, E: int, kind: str, seed: int = 0) -> DownProjector:
    """Draw a projector; deterministic given the seed. Requires E < D."""
    if kind == "srht":
        d_pad = next_pow2(D)
        if not 1 <= E < D:
            raise ValueError(f"down-projection requires 1 <= E < D, got E={E}, D={D}")
        op = random_srht(d_pad, E, seeding.substream(seed, seeding.DOWN_PROJ))
        return DownProjector(kind, D, E, seed, None, op)
    return DownProjector(kind, D, E, seed)


def default_down_kind(E: int) -> str:
    return "dense-rademacher" if E <= _DENSE_DOWN_MAX_E else "srht"


def apply_down(proj: DownProjector, u) -> np.ndarray:
    """Project one D-vector down to R^E."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (proj.D,):
        raise ValueError(f"expected a vector of length {proj.D}, got shape {u.shape}")
    if proj.kind == "srht":
        return srht_apply(proj.op, pad_pow2(u))
    Q = proj.matrix if proj.matrix is not None else _regen_dense(proj.kind, proj.D, proj.E, proj.seed)
    return Q @ u


def apply_down_batch(proj: DownProjector, U) -> np.ndarray:
    """Project the rows of an (n, D) matrix down to (n, E)."""
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2 or U.shape[1] != proj.D:
        raise ValueError(f"expected (n, {proj.D}) input, got shape {U.shape}")
    if proj.kind == "srht":
        return srht_apply_batch(proj.op, pad_pow2(U))
    Q = proj.matrix if proj.matrix is not None else _regen_dense(proj.kind, proj.D, proj.E, proj.seed)
    return U @ Q.T


@dataclass(frozen=True)
class CraftMapModel:
    """An up-projection to R^D paired with a down-projection to R^E."""

    up: RfmModel | SrhtRfmModel
    down: DownProjector
    params: PolyKernelParams

    def __post_init__(self) -> None:
        if self.up.D != self.down.D:
            raise ValueError(f"up/down dimension mismatch: {self.up.D} vs {self.down.D}")
        if not self.down.E < self.up.D:
            raise ValueError("compact map requires E < D")
        if self.up.params != self.params:
            raise ValueError("kernel parameters disagree with the up-projection")

    @property
    def d(self) -> int:
        return self.up.d

    @property
    def D(self) -> int:
        return self.up.D

    @property
    def E(self) -> int:
        return self.down.E

    def materialize(self) -> "CraftMapModel":
        up = self.up.materialize() if isinstance(self.up, RfmModel) else self.up
        return CraftMapModel(up, self.down.materialize(), self.params)


def build_craftmap(d: int, D: int, E: int, params: PolyKernelParams, p: float = 2.0,
                   seed: int = 0, up_kind: str = "rfm", down_kind: str | None = None,
                   truncated: bool = True) -> CraftMapModel:
    """Build the composed map. Up and down stages draw from disjoint
    substreams of the same seed."""
    if up_kind not in UP_KINDS:
        raise ValueError(f"unknown up-projection kind {up_kind!r}; expected one of {UP_KINDS}")
    if down_kind is None:
        down_kind = "srht" if up_kind == "rfm-srht" else default_down_kind(E)
    if not 1 <= E < D:
        raise ValueError(f"compact map requires 1 <= E < D, got E={E}, D={D}")
    if up_kind == "rfm":
        up = build_rfm(d, D, params, p, seed, truncated)
    else:
        up = build_srht_rfm(d, D, params, p, seed, truncated)
    down = build_down_projector(D, E, down_kind, seed)
    if down.kind != "srht":
        down = down.materialize()
    return CraftMapModel(up, down, params)


def _apply_up_batch(up, X) -> np.ndarray:
    if isinstance(up, RfmModel):
        return apply_rfm_batch(up, X)
    return apply_srht_rfm_batch(up, X)


def apply_craftmap(model: CraftMapModel, x) -> np.ndarray:
    """Map a single d-vector to its E-dimensional compact feature vector."""
    if isinstance(model.up, RfmModel):
        z = apply_rfm(model.up, x)
    else:
        z = apply_srht_rfm(model.up, x)
    return apply_down(model.down, z)


def apply_craftmap_batch(model: CraftMapModel, X, block_rows: int | None = None) -> np.ndarray:
    """Map the rows of an (n, d) matrix to (n, E), block by block.

    Blocking bounds the transient (block, D) up-projected buffer; results
    are independent of the block size up to floating-point association.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.d:
        raise ValueError(f"expected (n, {model.d}) input, got shape {X.shape}")
    n = X.shape[0]
    if n == 0:
        raise ValueError("input must be nonempty")
    if block_rows is None:
        block_rows = max(1, _BATCH_BLOCK_ELEMENTS // model.D)
    out = np.empty((n, model.E))
    for lo in range(0, n, block_rows):
        hi = min(lo + block_rows, n)
        out[lo:hi] = apply_down_batch(model.down, _apply_up_batch(model.up, X[lo:hi]))
    return out
