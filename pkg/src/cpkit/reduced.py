"""Eliminated-factor machinery for the CP least-squares objective.

With the leading factor solved in closed form, the objective becomes a
function of (B, C) alone.  This module provides that closed-form solve, the
Gramian it rests on, the JK x JK self-contraction kernel of the tensor, and
three independent evaluation routes for the reduced objective that are held
to mutual agreement by the test suite:

1. direct      - re-solve the leading factor, evaluate the residual;
2. trace       - 1/2 (||T||^2 - sum_r <u_r, M u_r>) over left singular
                 vectors of the Khatri-Rao matrix up to its numerical rank;
3. spectral    - eigenvalue-weighted overlap (or projector-distance) of the
                 kernel eigenvectors with the Khatri-Rao range.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels, linalg
from .linalg import EigResult
from .tensors import FactorSet, as_tensor3, tucker_23

__all__ = [
    "GramianG", "ContractionKernel", "gramian", "solve_factor", "objective",
    "contraction_kernel", "reduced_objective", "reduced_objective_trace",
    "reduced_objective_spectral", "reduced_objective_projection",
    "rayleigh_sum", "kr_profile",
]


@dataclass(frozen=True)
class GramianG:
    """R x R Gramian of the Khatri-Rao columns and its pseudo-inverse."""

    matrix: np.ndarray
    pseudo_inverse: np.ndarray


@dataclass(frozen=True)
class ContractionKernel:
    """Self-contraction of a tensor over mode 1, with its eigenpairs.

    `matrix` is the symmetric PSD JK x JK matricization; eigenvectors are
    sorted by nonincreasing eigenvalue and sign-fixed per `cpkit.linalg`.
    """

    matrix: np.ndarray
    eig: EigResult
    dims: tuple  # (J, K)

    @property
    def eigenvalues(self):
        return self.eig.eigenvalues

    @property
    def lambda_sum(self):
        return float(np.sum(np.maximum(self.eig.eigenvalues, 0.0)))

    def vbar(self, i):
        """Eigenvector i matricized to J x K (unit Frobenius norm)."""
        J, K = self.dims
        return self.eig.eigenvectors[:, i].reshape(J, K, order="F")

    def vbars(self):
        """All matricized eigenvectors, stacked as (JK, J, K)."""
        J, K = self.dims
        n = self.eig.eigenvectors.shape[1]
        return np.ascontiguousarray(
            self.eig.eigenvectors.reshape(J, K, n, order="F").transpose(2, 0, 1))


def gramian(B, C):
    """Gramian of the Khatri-Rao columns via the Hadamard shortcut.

    (G)_rs = (sum_j B[j,r] B[j,s]) * (sum_k C[k,r] C[k,s]); equal to the Gram
    matrix of khatri_rao(B, C) columns.
    """
    B = np.asarray(B, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    if B.ndim != 2 or C.ndim != 2:
        raise ValueError("factors must be matrices")
    if B.shape[1] != C.shape[1]:
        raise ValueError(
            f"column counts differ: {B.shape[1]} vs {C.shape[1]}")
    G = (B.T @ B) * (C.T @ C)
    return GramianG(matrix=G, pseudo_inverse=linalg.pinv_gram(G))


def solve_factor(T, B, C):
    """Least-squares-optimal leading factor for fixed (B, C).

    Returns mttkrp(T, B, C) @ G^+, the minimizer of the CP objective over the
    I x R factor alone.
    """
    T = as_tensor3(T)
    G = gramian(B, C)
    return tucker_23(T, B, C) @ G.pseudo_inverse


def objective(T, factors):
    """Half squared Frobenius residual of the CP model."""
    T = as_tensor3(T)
    return 0.5 * kernels.residual_sq(T, factors.A, factors.B, factors.C)


def contraction_kernel(T):
    """Build the JK x JK contraction kernel of T and eigendecompose it."""
    T = as_tensor3(T)
    M = kernels.gram_kernel(T)
    eig = linalg.sym_eig(M)
    return ContractionKernel(matrix=M, eig=eig, dims=(T.shape[1], T.shape[2]))


def reduced_objective(T, B, C):
    """Reduced objective: the CP objective with the leading factor re-solved."""
    T = as_tensor3(T)
    A = solve_factor(T, B, C)
    return objective(T, FactorSet(A, np.asarray(B, float), np.asarray(C, float)))


def _kr_orthobasis(B, C):
    """Orthonormal basis of range(khatri_rao(B, C)), truncated at numerical rank."""
    KR = kernels.khatri_rao(B, C)
    res = linalg.svd(KR)
    rbar = linalg.numerical_rank(res.sigma, KR.shape[0], KR.shape[1])
    return res.u[:, :rbar], KR


def reduced_objective_trace(source, B, C):
    """Reduced objective as 1/2 (||T||^2 - sum_r <u_r, M u_r>).

    `source` may be the tensor itself or a prebuilt ContractionKernel of it;
    u_r are the left singular vectors of khatri_rao(B, C) up to its numerical
    rank.
    """
    U, _ = _kr_orthobasis(B, C)
    if isinstance(source, ContractionKernel):
        total = float(np.trace(source.matrix))
        quad = float(np.sum((source.matrix @ U) * U)) if U.shape[1] else 0.0
    else:
        T = as_tensor3(source)
        total = float(np.vdot(T, T))
        I, J, K = T.shape
        U1 = T.transpose(1, 2, 0).reshape(J * K, I, order="F")
        W = U1.T @ U  # (I, rbar)
        quad = float(np.vdot(W, W))
    return 0.5 * (total - quad)


def reduced_objective_spectral(kernel, B, C):
    """Reduced objective as 1/2 sum_i lambda_i (1 - sum_r <vbar_i, u_r>^2)."""
    U, _ = _kr_orthobasis(B, C)
    lam = kernel.eigenvalues
    overlap = np.sum((kernel.eig.eigenvectors.T @ U) ** 2, axis=1)
    return 0.5 * float(np.sum(lam * (1.0 - overlap)))


def reduced_objective_projection(kernel, B, C):
    """Reduced objective as the eigenvalue-weighted squared distance of the
    matricized eigenvectors to the Khatri-Rao range, via the orthogonal
    projector onto range(khatri_rao(B, C))."""
    U, _ = _kr_orthobasis(B, C)
    V = kernel.eig.eigenvectors
    resid = V - U @ (U.T @ V)
    dist_sq = np.sum(resid * resid, axis=0)
    return 0.5 * float(np.sum(kernel.eigenvalues * dist_sq))


def rayleigh_sum(kernel, U):
    """sum_r <u_r, M u_r> for orthonormal columns U."""
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2 or U.shape[0] != kernel.matrix.shape[0]:
        raise ValueError(f"U has shape {U.shape}, expected ({kernel.matrix.shape[0]}, r)")
    if U.shape[1]:
        defect = np.linalg.norm(U.T @ U - np.eye(U.shape[1]))
        if defect > 1e-8:
            raise ValueError(f"columns are not orthonormal (defect {defect:.3e})")
    return float(np.sum((kernel.matrix @ U) * U))


def kr_profile(B, C):
    """Degeneracy monitor for the Khatri-Rao matrix of (B, C).

    Returns (numerical rank, sigma_min, sigma_max) of khatri_rao(B, C), with
    singular values derived from the R x R Gramian.
    """
    B = np.asarray(B, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    G = (B.T @ B) * (C.T @ C)
    lam = np.linalg.eigvalsh(0.5 * (G + G.T))
    sigma = np.sqrt(np.maximum(lam, 0.0))[::-1]
    rank = linalg.numerical_rank(sigma, B.shape[0] * C.shape[0], G.shape[0])
    smin = float(sigma[-1]) if sigma.size else 0.0
    smax = float(sigma[0]) if sigma.size else 0.0
    return rank, smin, smax
