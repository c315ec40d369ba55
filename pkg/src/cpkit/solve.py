"""Iterative CP solvers: ALS, regularized ALS, and line-search-accelerated ALS.

Every factor update solves the damped normal equations through the
eigenvalue-thresholded pseudo-inverse of the R x R Gramian, so degenerate
Khatri-Rao matrices never abort a run; they are flagged in the trace instead.
The driver `decompose` owns initialization, stopping rules and per-iteration
trace records.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels, linalg
from .centroid import centroid_init, centroid_init_symmetric
from .reduced import kr_profile, objective
from .tensors import FactorSet, as_tensor3

__all__ = ["SolverConfig", "TraceRecord", "ConvergenceTrace", "update_factor",
           "als_sweep", "rals_sweep", "lsals_sweep", "rals_schedule",
           "random_init", "decompose"]

METHODS = ("als", "rals", "lsals")
INITS = ("random", "centroid", "centroid_symmetric")
LS_STEPS = (1.0, 1.5, 2.0, 3.0, 5.0)
STALL_WINDOW = 5  # consecutive flat iterations before declaring a stall
DEGENERACY_RATIO = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Configuration of one decomposition run."""

    rank: int
    method: str = "als"
    init: str = "random"
    max_iters: int = 500
    tol_residual: float = 1e-10
    tol_stall: float = 1e-12
    rals_alpha0: float = 1.0
    rals_decay: float = 0.7
    rals_alpha_floor: float = 1e-12
    ls_interval: int = 1
    symmetric: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}, got {self.init!r}")
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol_residual <= 0 or self.tol_stall <= 0:
            raise ValueError("tolerances must be > 0")
        if not 0.0 < self.rals_decay < 1.0:
            raise ValueError("rals_decay must be in (0, 1)")
        if self.rals_alpha0 < 0 or self.rals_alpha_floor < 0:
            raise ValueError("regularization parameters must be >= 0")
        if self.ls_interval < 1:
            raise ValueError("ls_interval must be >= 1")
        if self.symmetric and self.init == "centroid":
            raise ValueError(
                "symmetric mode needs init 'random' or 'centroid_symmetric'")


@dataclass(frozen=True)
class TraceRecord:
    """State after one completed sweep."""

    iteration: int
    objective: float
    reduced: float          # reduced objective at the current (B, C)
    sigma_min: tuple        # smallest Khatri-Rao singular value, modes 1..3
    kr_rank: tuple          # numerical Khatri-Rao rank, modes 1..3
    wall_ms: float
    flags: tuple


@dataclass
class ConvergenceTrace:
    """Per-iteration records of a run, plus optional factor history."""

    records: list = field(default_factory=list)
    history: list = field(default_factory=list)  # FactorSet per iteration

    def __len__(self):
        return len(self.records)

    def objectives(self):
        return np.array([r.objective for r in self.records])

    def reduced_values(self):
        return np.array([r.reduced for r in self.records])

    def flags(self):
        return [r.flags for r in self.records]


def _gram_pinv(X, Y):
    """Thresholded pseudo-inverse of the Khatri-Rao Gramian (X^T X) o (Y^T Y).

    Also reports whether the Khatri-Rao matrix is numerically degenerate
    (sigma_min below DEGENERACY_RATIO times sigma_max).
    """
    G = (X.T @ X) * (Y.T @ Y)
    w, V = np.linalg.eigh(0.5 * (G + G.T))
    wmax = max(float(w[-1]), 0.0)
    cut = linalg.EPS * wmax * G.shape[0]
    inv = np.where(w > cut, 1.0 / np.where(w > cut, w, 1.0), 0.0)
    Gp = (V * inv) @ V.T
    degenerate = bool(w[0] < (DEGENERACY_RATIO ** 2) * wmax)
    return Gp, degenerate


def update_factor(T, factors, mode, alpha=0.0, prev=None):
    """Least-squares update of one factor with the other two fixed.

    With alpha > 0 the update solves the Tikhonov-damped normal equations
    (G + alpha I on the Gramian side, alpha * prev added to the right-hand
    side); prev defaults to the factor being replaced.  Returns the updated
    FactorSet and a degeneracy flag for the Khatri-Rao matrix encountered.
    """
    A, B, C = factors.A, factors.B, factors.C
    if mode == 1:
        X, Y, cur = B, C, A
    elif mode == 2:
        X, Y, cur = A, C, B
    elif mode == 3:
        X, Y, cur = A, B, C
    else:
        raise ValueError(f"mode must be 1, 2 or 3, got {mode}")
    rhs = kernels.mttkrp(T, X, Y, mode)
    if alpha > 0.0:
        if prev is None:
            prev = cur
        G = (X.T @ X) * (Y.T @ Y)
        G = G + alpha * np.eye(G.shape[0])
        new = np.linalg.solve(G, (rhs + alpha * prev).T).T
        degenerate = False
    else:
        Gp, degenerate = _gram_pinv(X, Y)
        new = rhs @ Gp
    parts = {1: (new, B, C), 2: (A, new, C), 3: (A, B, new)}[mode]
    return FactorSet(*parts), degenerate


def _sweep(T, factors, alpha=0.0, prev_factors=None, symmetric=False):
    """One Gauss-Seidel pass over the factors; returns (FactorSet, flags)."""
    flags = []
    prev = prev_factors if prev_factors is not None else factors
    F = factors
    if symmetric:
        F, deg1 = update_factor(T, F, 1, alpha, prev.A)
        F, deg2 = update_factor(T, F, 2, alpha, prev.B)
        W = F.B
        F = FactorSet(F.A, W, W.copy())
        degs = (deg1, deg2)
    else:
        F, deg1 = update_factor(T, F, 1, alpha, prev.A)
        F, deg2 = update_factor(T, F, 2, alpha, prev.B)
        F, deg3 = update_factor(T, F, 3, alpha, prev.C)
        degs = (deg1, deg2, deg3)
    for mode, deg in enumerate(degs, start=1):
        if deg:
            flags.append(f"kr_degenerate_mode{mode}")
    return F, flags


def als_sweep(T, factors):
    """One alternating least-squares sweep: update A, then B, then C."""
    T = as_tensor3(T)
    F, _ = _sweep(T, factors)
    return F


def rals_sweep(T, factors, alpha):
    """One regularized ALS sweep with proximal weight alpha toward the input."""
    T = as_tensor3(T)
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    F, _ = _sweep(T, factors, alpha=alpha, prev_factors=factors)
    return F


def _extrapolate(base, target, step):
    return FactorSet(base.A + step * (target.A - base.A),
                     base.B + step * (target.B - base.B),
                     base.C + step * (target.C - base.C))


def _lsals_step(T, factors, symmetric=False):
    """ALS sweep followed by a finite line search along the sweep direction.

    Candidates are factors + s * (sweep - factors) for s in LS_STEPS,
    evaluated jointly over all three factors; s = 1 (the plain sweep) is
    always among them, so the result is never worse than plain ALS.
    """
    swept, flags = _sweep(T, factors, symmetric=symmetric)
    best, best_val, best_step = swept, objective(T, swept), 1.0
    for s in LS_STEPS[1:]:
        cand = _extrapolate(factors, swept, s)
        val = objective(T, cand)
        if val < best_val:
            best, best_val, best_step = cand, val, s
    if best_step != 1.0:
        flags = flags + [f"ls_step={best_step:g}"]
    return best, flags


def lsals_sweep(T, factors, prev_factors=None):
    """Line-search-accelerated ALS sweep.

    `prev_factors` is accepted for call-site symmetry with the other sweeps;
    the search direction is the fresh sweep minus the current iterate.
    """
    T = as_tensor3(T)
    F, _ = _lsals_step(T, factors)
    return F


def rals_schedule(k, cfg):
    """Regularization weight at iteration k: geometric decay with a floor."""
    if k < 0:
        raise ValueError("iteration index must be >= 0")
    return max(cfg.rals_alpha0 * cfg.rals_decay ** k, cfg.rals_alpha_floor)


def random_init(T, rank, seed, symmetric=False):
    """Seeded standard-normal factors with unit-norm columns."""
    T = as_tensor3(T)
    I, J, K = T.shape
    rng = np.random.default_rng(seed)

    def draw(n):
        M = rng.standard_normal((n, rank))
        return M / np.linalg.norm(M, axis=0)

    A = draw(I)
    if symmetric:
        if J != K:
            raise ValueError(f"symmetric init needs J = K, got dims {T.shape}")
        W = draw(J)
        return FactorSet(A, W, W.copy())
    return FactorSet(A, draw(J), draw(K))


def _initial_factors(T, cfg):
    if cfg.init == "random":
        return random_init(T, cfg.rank, cfg.seed, symmetric=cfg.symmetric)
    if cfg.init == "centroid":
        return centroid_init(T, cfg.rank).init_factors
    return centroid_init_symmetric(T, cfg.rank)


def _reduced_via_gram(T, F, norm_sq):
    """Reduced objective from the normal equations, no tensor reassembly.

    Equals objective(T, {solved leading factor, B, C}) up to rounding; the
    direct route is `cpkit.reduced.reduced_objective`.
    """
    W = kernels.mttkrp(T, F.B, F.C, 1)
    Gp, _ = _gram_pinv(F.B, F.C)
    return 0.5 * (norm_sq - float(np.vdot(W @ Gp, W)))


def decompose(T, cfg, keep_history=False):
    """Run the configured solver; returns (factors, trace, status).

    status is 'converged' (objective below tol_residual), 'stalled' (relative
    decrease below tol_stall for STALL_WINDOW consecutive sweeps) or
    'max_iters'.  One trace record is appended per completed sweep; with
    keep_history the factors of every iteration are retained as well.
    """
    T = as_tensor3(T)
    if isinstance(cfg, dict):
        cfg = SolverConfig(**cfg)
    if cfg.symmetric and T.shape[1] != T.shape[2]:
        raise ValueError(f"symmetric mode needs J = K, got dims {T.shape}")
    F = _initial_factors(T, cfg)
    norm_sq = float(np.vdot(T, T))
    trace = ConvergenceTrace()
    prev_obj = objective(T, F)
    stall_run = 0
    status = "max_iters"
    for k in range(1, cfg.max_iters + 1):
        t0 = time.perf_counter()
        if cfg.method == "als":
            F, flags = _sweep(T, F, symmetric=cfg.symmetric)
        elif cfg.method == "rals":
            alpha = rals_schedule(k - 1, cfg)
            F, flags = _sweep(T, F, alpha=alpha, prev_factors=F,
                              symmetric=cfg.symmetric)
        else:  # lsals
            if k % cfg.ls_interval == 0:
                F, flags = _lsals_step(T, F, symmetric=cfg.symmetric)
            else:
                F, flags = _sweep(T, F, symmetric=cfg.symmetric)
        obj = objective(T, F)
        red = _reduced_via_gram(T, F, norm_sq)
        profiles = [kr_profile(F.B, F.C), kr_profile(F.C, F.A),
                    kr_profile(F.A, F.B)]
        wall_ms = (time.perf_counter() - t0) * 1000.0
        trace.records.append(TraceRecord(
            iteration=k,
            objective=obj,
            reduced=red,
            sigma_min=tuple(p[1] for p in profiles),
            kr_rank=tuple(p[0] for p in profiles),
            wall_ms=wall_ms,
            flags=tuple(flags),
        ))
        if keep_history:
            trace.history.append(F.copy())
        if obj < cfg.tol_residual:
            status = "converged"
            break
        decrease = (prev_obj - obj) / max(prev_obj, np.finfo(np.float64).tiny)
        stall_run = stall_run + 1 if decrease < cfg.tol_stall else 0
        if stall_run >= STALL_WINDOW:
            status = "stalled"
            break
        prev_obj = obj
    return F, trace, status
