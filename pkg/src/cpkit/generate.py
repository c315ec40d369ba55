"""Synthetic tensor generators for experiments and tests."""

from dataclasses import dataclass

import numpy as np

from .tensors import FactorSet, as_tensor3

__all__ = ["GeneratorSpec", "generate"]

KINDS = ("random_factors", "swampy", "symmetric", "diagonal", "noisy")


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for one synthetic tensor.

    collinearity applies to the swampy kind: every factor column is
    c * shared + sqrt(1 - c^2) * independent for a per-factor shared unit
    vector.  noise is the relative noise level; when positive, elementwise
    Gaussian noise of total expected energy (noise * ||T||_F)^2 is added.
    """

    kind: str
    dims: tuple
    rank: int
    seed: int = 0
    collinearity: float = 0.0
    noise: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ValueError(f"dims must be three positive integers, got {self.dims}")
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if not 0.0 <= self.collinearity < 1.0:
            raise ValueError("collinearity must be in [0, 1)")
        if self.noise < 0.0:
            raise ValueError("noise must be >= 0")


def _unit_columns(rng, n, rank):
    M = rng.standard_normal((n, rank))
    return M / np.linalg.norm(M, axis=0)


def _collinear_columns(rng, n, rank, c):
    shared = rng.standard_normal(n)
    shared /= np.linalg.norm(shared)
    cols = []
    for _ in range(rank):
        g = rng.standard_normal(n)
        g /= np.linalg.norm(g)
        col = c * shared + np.sqrt(1.0 - c * c) * g
        cols.append(col / np.linalg.norm(col))
    return np.column_stack(cols)


def _canonical_cyclic(T):
    """Copy entries from the lexicographically smallest cyclic index rotation.

    Floating-point products are not associative, so assembling sum_r a o a o a
    leaves last-bit asymmetries; this makes t[i,j,k] == t[j,k,i] == t[k,i,j]
    exact.
    """
    n = T.shape[0]
    i, j, k = np.meshgrid(np.arange(n), np.arange(n), np.arange(n),
                          indexing="ij")
    keys = np.stack([
        (i * n + j) * n + k,
        (j * n + k) * n + i,
        (k * n + i) * n + j,
    ])
    canon = keys.min(axis=0)
    ci, rem = np.divmod(canon, n * n)
    cj, ck = np.divmod(rem, n)
    return T[ci, cj, ck]


def generate(spec):
    """Build the tensor of a GeneratorSpec; returns (tensor, factors or None)."""
    rng = np.random.default_rng(spec.seed)
    I, J, K = spec.dims
    R = spec.rank
    factors = None
    if spec.kind == "diagonal":
        if R > min(spec.dims):
            raise ValueError(f"diagonal kind needs rank <= min(dims), got {R}")
        T = np.zeros(spec.dims)
        for r in range(R):
            T[r, r, r] = 1.0
        eye = np.eye(max(spec.dims))
        factors = FactorSet(eye[:I, :R], eye[:J, :R], eye[:K, :R])
    elif spec.kind == "symmetric":
        if not I == J == K:
            raise ValueError(f"symmetric kind needs cubic dims, got {spec.dims}")
        A = _unit_columns(rng, I, R)
        factors = FactorSet(A, A.copy(), A.copy())
        T = _canonical_cyclic(factors.compose())
    elif spec.kind == "swampy":
        c = spec.collinearity
        mats = [_collinear_columns(rng, n, R, c) for n in spec.dims]
        factors = FactorSet(*mats)
        T = factors.compose()
    else:  # random_factors, noisy
        mats = [_unit_columns(rng, n, R) for n in spec.dims]
        factors = FactorSet(*mats)
        T = factors.compose()
    sigma = spec.noise
    if spec.kind == "noisy" and sigma == 0.0:
        raise ValueError("noisy kind needs noise > 0")
    if sigma > 0.0:
        scale = sigma * np.linalg.norm(T) / np.sqrt(T.size)
        T = T + scale * rng.standard_normal(T.shape)
    return as_tensor3(T), factors
