"""Deterministic dense eigendecomposition, SVD, pseudo-inverse and rank.

Backed by LAPACK through numpy.linalg; this module owns the conventions the
rest of the package relies on: nonincreasing spectra, a fixed sign rule for
eigen/singular vectors, and relative thresholds for numerical rank.

Sign rule: each eigenvector (and each left singular vector, with the paired
right vector flipped in tandem) is scaled so its largest-magnitude entry is
positive; ties break at the lowest index.
"""

from dataclasses import dataclass

import numpy as np

EPS = float(np.finfo(np.float64).eps)

__all__ = ["EPS", "SvdResult", "EigResult", "sym_eig", "svd", "pinv_gram",
           "numerical_rank"]


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD A = U diag(sigma) V^T with sigma nonincreasing."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray  # n x p, columns are right singular vectors

    def reconstruct(self):
        return (self.u * self.sigma) @ self.v.T


@dataclass(frozen=True)
class EigResult:
    """Symmetric eigendecomposition with eigenvalues sorted nonincreasing."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]

    def reconstruct(self):
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


def _fix_signs(V):
    """Flip columns so the largest-magnitude entry of each is positive.

    Returns the applied signs so paired factors can be flipped in tandem.
    """
    if V.shape[1] == 0:
        return V, np.ones(0)
    idx = np.argmax(np.abs(V), axis=0)  # first occurrence wins ties
    lead = V[idx, np.arange(V.shape[1])]
    signs = np.where(lead < 0.0, -1.0, 1.0)
    return V * signs, signs


def sym_eig(M):
    """Eigendecomposition of a (numerically) symmetric matrix.

    The input is symmetrized as (M + M^T)/2 before factorization; a symmetry
    defect above 1e-8 * ||M||_F is rejected.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise ValueError("matrix entries must be finite")
    norm = np.linalg.norm(M)
    defect = np.linalg.norm(M - M.T)
    if defect > 1e-8 * max(norm, np.finfo(np.float64).tiny):
        raise ValueError(
            f"matrix is not symmetric: defect {defect:.3e} vs norm {norm:.3e}")
    sym = 0.5 * (M + M.T)
    w, V = np.linalg.eigh(sym)
    order = np.argsort(w, kind="stable")[::-1]
    w = w[order]
    V = V[:, order]
    V, _ = _fix_signs(V)
    return EigResult(eigenvalues=w, eigenvectors=V)


def svd(A):
    """Thin SVD with the deterministic sign convention applied to U."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise ValueError("matrix entries must be finite")
    u, s, vt = np.linalg.svd(A, full_matrices=False)
    u, signs = _fix_signs(u)
    v = vt.T * signs
    return SvdResult(u=u, sigma=s, v=v)


def numerical_rank(sigma, m, n):
    """Count singular values above eps * sigma_1 * max(m, n)."""
    sigma = np.asarray(sigma, dtype=np.float64).reshape(-1)
    if sigma.size == 0 or sigma[0] <= 0.0:
        return 0
    return int(np.count_nonzero(sigma > EPS * sigma[0] * max(m, n)))


def pinv_gram(G):
    """Moore-Penrose pseudo-inverse of a symmetric PSD matrix.

    Rank deficiency is handled by eigenvalue thresholding at
    eps * lambda_1 * n, matching `numerical_rank` applied to G itself.
    """
    G = np.asarray(G, dtype=np.float64)
    eig = sym_eig(G)
    w = eig.eigenvalues
    n = G.shape[0]
    cut = EPS * max(w[0], 0.0) * n
    inv = np.where(w > cut, 1.0 / np.where(w > cut, w, 1.0), 0.0)
    return (eig.eigenvectors * inv) @ eig.eigenvectors.T
