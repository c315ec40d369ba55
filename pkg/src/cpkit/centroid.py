"""Residual bounds and the centroid-projection initializer.

All bounds rest on the eigenpairs of the contraction kernel: the lower bound
truncates each matricized eigenvector by SVD, the upper bound is the closed
form attained by the rank-R truncation of the centroid matrix (the
eigenvalue-weighted average of matricized eigenvectors), and the gap bound is
their a-posteriori difference.  The initializer turns the centroid's leading
singular vectors into starting factors, trying each of the three tensor modes
as the eliminated one and keeping the candidate with the smallest residual.
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import SvdResult
from .reduced import contraction_kernel, objective, solve_factor
from .tensors import FactorSet, as_tensor3

__all__ = ["CentroidBundle", "lower_bound", "centroid", "upper_bound",
           "gap_bound", "centroid_init", "centroid_init_symmetric",
           "per_mode_bounds"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CentroidBundle:
    """Centroid matrix, bounds and initial factors for one tensor.

    Bounds refer to the eliminated mode recorded in `mode_assignment`
    (1 means the first tensor mode was solved in closed form, etc.); the
    reduced-objective infimum they bracket is mode-independent.
    """

    centroid: np.ndarray
    centroid_svd: SvdResult
    lambda_sum: float
    lower_bound: float
    upper_bound: float
    gap_bound: float
    init_factors: FactorSet
    mode_assignment: int


def _weights(kernel):
    """Eigenvalues clipped at zero; tiny negatives are discretization noise."""
    return np.maximum(kernel.eigenvalues, 0.0)


def _eigvec_singular_values(kernel):
    """Singular values of every matricized eigenvector, batched (n, min(J,K))."""
    return np.linalg.svd(kernel.vbars(), compute_uv=False)


def lower_bound(kernel, rank):
    """Eigenvalue-weighted tail energy of the matricized eigenvectors.

    1/2 sum_i lambda_i sum_{k>rank} sigma_k(Vbar_i)^2; a lower bound on the
    reduced-objective infimum.  Zero when rank >= min(J, K).
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    if rank >= min(kernel.dims):
        return 0.0
    lam = _weights(kernel)
    sv = _eigvec_singular_values(kernel)
    tails = np.sum(sv[:, rank:] ** 2, axis=1)
    return 0.5 * float(lam @ tails)


def centroid(kernel):
    """Eigenvalue-weighted average of the matricized eigenvectors."""
    lam = _weights(kernel)
    total = float(np.sum(lam))
    if total <= 0.0:
        raise ValueError("empty spectrum: kernel has no positive eigenvalues")
    return np.tensordot(lam, kernel.vbars(), axes=1) / total


def upper_bound(kernel, rank):
    """Closed-form minimum of the dominating functional at the centroid.

    1/2 [ (1 - ||Vc||_F^2) * sum(lambda) + sum(lambda) * tail_sv(Vc)^2 ].
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    Vc = centroid(kernel)
    lam_sum = float(np.sum(_weights(kernel)))
    sv = np.linalg.svd(Vc, compute_uv=False)
    norm_sq = float(np.sum(sv ** 2))
    tail = float(np.sum(sv[rank:] ** 2))
    return 0.5 * (lam_sum * (1.0 - norm_sq) + lam_sum * tail)


def gap_bound(kernel, rank):
    """A-posteriori bound on the optimality gap of the centroid factors.

    1/2 ( sum_i lambda_i head_sv(Vbar_i)^2 - sum(lambda) * head_sv(Vc)^2 )
    with head sums over the leading `rank` singular values.  Nonnegative by
    convexity of the squared Schatten norm.
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    lam = _weights(kernel)
    sv = _eigvec_singular_values(kernel)
    heads = np.sum(sv[:, :rank] ** 2, axis=1)
    Vc = centroid(kernel)
    svc = np.linalg.svd(Vc, compute_uv=False)
    head_c = float(np.sum(svc[:rank] ** 2))
    return 0.5 * (float(lam @ heads) - float(np.sum(lam)) * head_c)


def _mode_views(T):
    """Cyclic views of T with each mode moved to the eliminated (first) slot.

    Yields (mode, view, assemble) where assemble maps (solved, left, right)
    factors of the view back to (A, B, C) of the original orientation.
    """
    yield 1, T, lambda s, y, z: FactorSet(s, y, z)
    yield 2, np.ascontiguousarray(T.transpose(1, 2, 0)), \
        lambda s, y, z: FactorSet(z, s, y)
    yield 3, np.ascontiguousarray(T.transpose(2, 0, 1)), \
        lambda s, y, z: FactorSet(y, z, s)


def centroid_init(T, rank):
    """Centroid-projection starting factors with bounds, best of three modes.

    For each feasible eliminated mode: build the kernel, average its
    matricized eigenvectors into the centroid, take its leading `rank` left
    and right singular vectors as the retained factors and solve the
    eliminated one in closed form.  The candidate with the smallest residual
    wins; its mode, bounds and centroid are recorded in the bundle.
    """
    T = as_tensor3(T)
    if rank < 1:
        raise ValueError("rank must be >= 1")
    best = None
    for mode, view, assemble in _mode_views(T):
        J, K = view.shape[1], view.shape[2]
        if rank > min(J, K):
            continue
        kernel = contraction_kernel(view)
        Vc = centroid(kernel)
        csvd = linalg.svd(Vc)
        y = csvd.u[:, :rank]
        z = csvd.v[:, :rank]
        solved = solve_factor(view, y, z)
        factors = assemble(solved, y, z)
        value = objective(T, factors)
        if best is None or value < best[0]:
            best = (value, mode, kernel, Vc, csvd, factors)
    if best is None:
        raise ValueError(
            f"rank {rank} exceeds min(J, K) for every eliminated mode of "
            f"dims {T.shape}")
    _, mode, kernel, Vc, csvd, factors = best
    return CentroidBundle(
        centroid=Vc,
        centroid_svd=csvd,
        lambda_sum=float(np.sum(_weights(kernel))),
        lower_bound=lower_bound(kernel, rank),
        upper_bound=upper_bound(kernel, rank),
        gap_bound=gap_bound(kernel, rank),
        init_factors=factors,
        mode_assignment=mode,
    )


def per_mode_bounds(T, rank):
    """Bounds for every feasible eliminated mode, keyed by mode number."""
    T = as_tensor3(T)
    if rank < 1:
        raise ValueError("rank must be >= 1")
    report = {}
    for mode, view, _ in _mode_views(T):
        if rank > min(view.shape[1], view.shape[2]):
            continue
        kernel = contraction_kernel(view)
        Vc = centroid(kernel)
        report[str(mode)] = {
            "lower_bound": lower_bound(kernel, rank),
            "upper_bound": upper_bound(kernel, rank),
            "gap_bound": gap_bound(kernel, rank),
            "lambda_sum": float(np.sum(_weights(kernel))),
            "centroid_norm": float(np.linalg.norm(Vc)),
        }
    if not report:
        raise ValueError(
            f"rank {rank} exceeds min(J, K) for every eliminated mode of "
            f"dims {T.shape}")
    return report


def centroid_init_symmetric(T, rank):
    """Centroid starting factors with identical B and C, for J = K tensors.

    Uses the eigendecomposition of the symmetrized centroid instead of its
    SVD, so the two retained factors coincide exactly.
    """
    T = as_tensor3(T)
    I, J, K = T.shape
    if J != K:
        raise ValueError(f"symmetric init needs J = K, got dims {T.shape}")
    if not 1 <= rank <= J:
        raise ValueError(f"rank must be in [1, {J}], got {rank}")
    kernel = contraction_kernel(T)
    Vc = centroid(kernel)
    defect = np.linalg.norm(Vc - Vc.T)
    scale = max(np.linalg.norm(Vc), np.finfo(np.float64).tiny)
    logger.debug("centroid symmetry defect: %.3e (relative %.3e)",
                 defect, defect / scale)
    if defect > 1e-6 * scale:
        raise ValueError(
            f"centroid is not symmetric enough for the symmetric init "
            f"(defect {defect:.3e}, norm {scale:.3e})")
    eig = linalg.sym_eig(0.5 * (Vc + Vc.T))
    order = np.argsort(-np.abs(eig.eigenvalues), kind="stable")
    W = eig.eigenvectors[:, order[:rank]]
    A = solve_factor(T, W, W)
    return FactorSet(A, W, W.copy())
