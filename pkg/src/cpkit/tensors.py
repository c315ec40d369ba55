"""Dense third-order tensor values, index conventions and multilinear products.

A tensor is a C-contiguous float64 ndarray of shape (I, J, K).  The global
vectorization convention is first-index-fastest: vec of a J x K matrix places
entry (j, k) at flat position j + k*J (0-based), and every Khatri-Rao column,
unfolding row and kernel matricization in the package follows it.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .kernels import khatri_rao  # re-exported; part of this module's surface

__all__ = [
    "FactorSet", "as_tensor3", "as_matrix", "outer3", "khatri_rao",
    "tucker_23", "unfold", "refold", "vec", "unvec", "frobenius_sq", "inner",
]


def as_tensor3(values):
    """Validate and return a dense I x J x K tensor as float64 ndarray.

    Raises ValueError on wrong dimensionality, empty axes or non-finite
    entries.
    """
    T = np.ascontiguousarray(values, dtype=np.float64)
    if T.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got shape {T.shape}")
    if min(T.shape) < 1:
        raise ValueError(f"tensor dims must be positive, got {T.shape}")
    if not np.isfinite(T).all():
        raise ValueError("tensor entries must be finite")
    return T


def as_matrix(values):
    """Validate and return a dense matrix as float64 ndarray."""
    M = np.ascontiguousarray(values, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise ValueError("matrix entries must be finite")
    return M


@dataclass(frozen=True)
class FactorSet:
    """CP factor matrices A (I x R), B (J x R), C (K x R)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        for name in ("A", "B", "C"):
            object.__setattr__(self, name, as_matrix(getattr(self, name)))
        if not (self.A.shape[1] == self.B.shape[1] == self.C.shape[1]):
            raise ValueError(
                "factor matrices must share a column count, got "
                f"{self.A.shape[1]}, {self.B.shape[1]}, {self.C.shape[1]}")
        if self.rank < 1:
            raise ValueError("rank must be >= 1")

    @property
    def rank(self):
        return self.A.shape[1]

    @property
    def dims(self):
        return (self.A.shape[0], self.B.shape[0], self.C.shape[0])

    def copy(self):
        return FactorSet(self.A.copy(), self.B.copy(), self.C.copy())

    def compose(self):
        """Assemble the dense tensor sum_r a_r o b_r o c_r."""
        return kernels.cp_compose(self.A, self.B, self.C)


def outer3(a, b, c):
    """Outer product tensor with entries a[i] * b[j] * c[k]."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    c = np.asarray(c, dtype=np.float64).reshape(-1)
    if min(a.size, b.size, c.size) < 1:
        raise ValueError("outer3 requires nonempty vectors")
    T = a[:, None, None] * b[None, :, None] * c[None, None, :]
    return as_tensor3(T)


def tucker_23(T, B, C):
    """Contract T over its trailing modes: out[i, r] = sum_jk T[i,j,k] B[j,r] C[k,r]."""
    return kernels.mttkrp(T, B, C, mode=1)


def unfold(T, mode):
    """Matricize T along one mode.

    mode 1 -> (J*K) x I with row index j + k*J, mode 2 -> (K*I) x J with row
    index k + i*K, mode 3 -> (I*J) x K with row index i + j*I.
    """
    T = as_tensor3(T)
    I, J, K = T.shape
    if mode == 1:
        return T.transpose(1, 2, 0).reshape(J * K, I, order="F")
    if mode == 2:
        return T.transpose(2, 0, 1).reshape(K * I, J, order="F")
    if mode == 3:
        return T.reshape(I * J, K, order="F")
    raise ValueError(f"mode must be 1, 2 or 3, got {mode}")


def refold(M, mode, dims):
    """Inverse of `unfold` for the given mode and target dims (I, J, K)."""
    M = as_matrix(M)
    I, J, K = dims
    if mode == 1:
        if M.shape != (J * K, I):
            raise ValueError(f"shape {M.shape} does not refold to {dims} in mode 1")
        return np.ascontiguousarray(M.reshape(J, K, I, order="F").transpose(2, 0, 1))
    if mode == 2:
        if M.shape != (K * I, J):
            raise ValueError(f"shape {M.shape} does not refold to {dims} in mode 2")
        return np.ascontiguousarray(M.reshape(K, I, J, order="F").transpose(1, 2, 0))
    if mode == 3:
        if M.shape != (I * J, K):
            raise ValueError(f"shape {M.shape} does not refold to {dims} in mode 3")
        return np.ascontiguousarray(M.reshape(I, J, K, order="F"))
    raise ValueError(f"mode must be 1, 2 or 3, got {mode}")


def vec(X):
    """Flatten a matrix first-index-fastest (entry (j, k) at j + k*J)."""
    return np.asarray(X, dtype=np.float64).reshape(-1, order="F")


def unvec(v, J, K):
    """Inverse of `vec` onto a J x K matrix."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.size != J * K:
        raise ValueError(f"vector of length {v.size} does not unvec to {J}x{K}")
    return v.reshape(J, K, order="F")


def frobenius_sq(T):
    """Sum of squared entries."""
    T = np.asarray(T, dtype=np.float64)
    return float(np.vdot(T, T))


def inner(T, L):
    """Sum of products of corresponding entries; dims must match."""
    T = np.asarray(T, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    if T.shape != L.shape:
        raise ValueError(f"shape mismatch: {T.shape} vs {L.shape}")
    return float(np.vdot(T, L))
