"""Swamp metrics and rank-1 critical-point tooling.

Swamps (long near-flat stretches of ALS iterations) correlate with the
Khatri-Rao range barely moving between sweeps; the metrics here make that
observable: projector distances between iterate ranges probed with a fixed
seeded vector, and condition numbers of concatenated Khatri-Rao matrices.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels, linalg
from .tensors import as_tensor3

__all__ = ["SwampReport", "make_probe", "subspace_proj_distance",
           "kr_condition", "rank1_critical_residual", "rank1_als_sweep",
           "rank1_stationarity_check", "swamp_report"]

CONDITION_INF_CUTOFF = 1e-300


def make_probe(n, seed=0):
    """Fixed seeded unit probe vector of length n."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    return x / np.linalg.norm(x)


def _orthobasis(M):
    res = linalg.svd(np.asarray(M, dtype=np.float64))
    r = linalg.numerical_rank(res.sigma, M.shape[0], M.shape[1])
    return res.u[:, :r]


def subspace_proj_distance(M1, M2, x):
    """Norm difference of the projections of x onto range(M1) and range(M2)."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if np.linalg.norm(x) == 0.0:
        raise ValueError("probe vector must be nonzero")
    U1 = _orthobasis(M1)
    U2 = _orthobasis(M2)
    p1 = U1 @ (U1.T @ x)
    p2 = U2 @ (U2.T @ x)
    return float(np.linalg.norm(p1 - p2))


def _avg_proj_distance(M1, M2, seed=0, n_probes=1):
    """Projector distance averaged over n_probes seeded probes."""
    n = M1.shape[0]
    if n_probes == 1:
        return subspace_proj_distance(M1, M2, make_probe(n, seed))
    vals = [subspace_proj_distance(M1, M2, make_probe(n, seed + i))
            for i in range(n_probes)]
    return float(np.mean(vals))


def kr_condition(M1, M2):
    """Condition number of the columnwise concatenation [M1 M2].

    Returns +inf when the concatenation is numerically singular (smallest
    singular value below the numerical-rank threshold).
    """
    cat = np.hstack([np.asarray(M1, dtype=np.float64),
                     np.asarray(M2, dtype=np.float64)])
    s = np.linalg.svd(cat, compute_uv=False)
    if s.size == 0 or s[0] <= 0.0:
        return float("inf")
    cut = max(linalg.EPS * s[0] * max(cat.shape), CONDITION_INF_CUTOFF)
    if s[-1] < cut:
        return float("inf")
    return float(s[0] / s[-1])


def _contract_23(T, b, c):
    return np.einsum("ijk,j,k->i", T, b, c)


def _contract_13(T, a, c):
    return np.einsum("ijk,i,k->j", T, a, c)


def _contract_12(T, a, b):
    return np.einsum("ijk,i,j->k", T, a, b)


def rank1_critical_residual(T, a, b, c):
    """Max norm defect of the three rank-1 first-order optimality conditions.

    With mu = ||a||, unit a_hat = a/mu and (b, c) normalized internally, the
    conditions are mu*a_hat = T contracted with (b, c), mu*b = T contracted
    with (a_hat, c), and mu*c = T contracted with (a_hat, b); the result is
    zero exactly at critical points of the rank-1 fit.
    """
    T = as_tensor3(T)
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    c = np.asarray(c, dtype=np.float64).reshape(-1)
    nb = np.linalg.norm(b)
    nc = np.linalg.norm(c)
    if np.linalg.norm(a) == 0.0:
        raise ValueError("a must be nonzero")
    if nb == 0.0 or nc == 0.0:
        raise ValueError("b and c must be nonzero")
    # reparametrize to unit b, c; the scale of the model moves into a
    a = a * (nb * nc)
    b = b / nb
    c = c / nc
    mu = np.linalg.norm(a)
    a_hat = a / mu
    r1 = np.linalg.norm(mu * a_hat - _contract_23(T, b, c))
    r2 = np.linalg.norm(mu * b - _contract_13(T, a_hat, c))
    r3 = np.linalg.norm(mu * c - _contract_12(T, a_hat, b))
    return float(max(r1, r2, r3))


def rank1_als_sweep(T, a, b, c):
    """One rank-1 ALS sweep: each vector is the exact LS update in turn."""
    T = as_tensor3(T)
    a = _contract_23(T, b, c) / (np.vdot(b, b) * np.vdot(c, c))
    b = _contract_13(T, a, c) / (np.vdot(a, a) * np.vdot(c, c))
    c = _contract_12(T, a, b) / (np.vdot(a, a) * np.vdot(b, b))
    return a, b, c


def _sine_angle(u, v):
    # norm of the component of v orthogonal to u; unlike sqrt(1 - cos^2)
    # this keeps full resolution for angles near zero
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 1.0
    u = u / nu
    v = v / nv
    return float(min(np.linalg.norm(v - (u @ v) * u), 1.0))


def rank1_stationarity_check(T, a, b, c, n_sweeps=20):
    """Max angular drift of the normalized factors over rank-1 ALS sweeps.

    Near zero at critical points, where the sweep map holds the directions
    fixed.
    """
    T = as_tensor3(T)
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    c = np.asarray(c, dtype=np.float64).reshape(-1)
    drift = 0.0
    for _ in range(n_sweeps):
        a2, b2, c2 = rank1_als_sweep(T, a, b, c)
        step = max(_sine_angle(a, a2), _sine_angle(b, b2), _sine_angle(c, c2))
        drift = max(drift, step)
        a, b, c = a2, b2, c2
    return drift


@dataclass(frozen=True)
class SwampReport:
    """Per-iteration swamp metrics of a factor history.

    Rows of `proj_distance` and `condition` compare iterates k and k+1 of the
    three Khatri-Rao pairings (B o C, C o A, A o B).  `reference_distance`
    holds probe distances of range(A_k), range(B_k), range(C_k) to a
    reference factor set when one is supplied.  `stall_flags` marks
    iterations whose relative objective decrease fell below the stall
    tolerance (when objectives are supplied).
    """

    proj_distance: np.ndarray
    condition: np.ndarray
    reference_distance: np.ndarray | None = None
    stall_flags: np.ndarray | None = None


def _kr_pairings(F):
    return (kernels.khatri_rao(F.B, F.C),
            kernels.khatri_rao(F.C, F.A),
            kernels.khatri_rao(F.A, F.B))


def swamp_report(history, objectives=None, stall_tol=1e-12, reference=None,
                 probe_seed=0, n_probes=1):
    """Swamp metrics for a per-iteration factor history.

    history: sequence of FactorSet; objectives: matching objective values
    used to flag stalled iterations; reference: optional FactorSet to
    measure factor-subspace drift against.
    """
    history = list(history)
    if len(history) < 1:
        raise ValueError("history must contain at least one iterate")
    kr_seq = [_kr_pairings(F) for F in history]
    n = len(history)
    dist = np.zeros((max(n - 1, 0), 3))
    cond = np.zeros((max(n - 1, 0), 3))
    for k in range(n - 1):
        for m in range(3):
            dist[k, m] = _avg_proj_distance(kr_seq[k][m], kr_seq[k + 1][m],
                                            seed=probe_seed, n_probes=n_probes)
            cond[k, m] = kr_condition(kr_seq[k][m], kr_seq[k + 1][m])
    ref_dist = None
    if reference is not None:
        ref_dist = np.zeros((n, 3))
        ref_mats = (reference.A, reference.B, reference.C)
        for k, F in enumerate(history):
            for m, mat in enumerate((F.A, F.B, F.C)):
                ref_dist[k, m] = _avg_proj_distance(
                    mat, ref_mats[m], seed=probe_seed, n_probes=n_probes)
    flags = None
    if objectives is not None:
        obj = np.asarray(objectives, dtype=np.float64)
        if obj.size != n:
            raise ValueError("objectives must match the history length")
        flags = np.zeros(n, dtype=bool)
        for k in range(1, n):
            decrease = (obj[k - 1] - obj[k]) / max(obj[k - 1],
                                                   np.finfo(np.float64).tiny)
            flags[k] = decrease < stall_tol
    return SwampReport(proj_distance=dist, condition=cond,
                       reference_distance=ref_dist, stall_flags=flags)
