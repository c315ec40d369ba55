"""Independent oracles used across the test suite.

Everything here is deliberately naive (triple loops, generic least squares,
multi-start search) so expected values never share a code path with the
implementations they check.
"""

import numpy as np

from cpkit.reduced import objective
from cpkit.solve import als_sweep, random_init
from cpkit.tensors import FactorSet


def outer3_loops(a, b, c):
    T = np.zeros((len(a), len(b), len(c)))
    for i in range(len(a)):
        for j in range(len(b)):
            for k in range(len(c)):
                T[i, j, k] = a[i] * b[j] * c[k]
    return T


def khatri_rao_loops(B, C):
    J, R = B.shape
    K = C.shape[0]
    out = np.zeros((J * K, R))
    for r in range(R):
        for k in range(K):
            for j in range(J):
                out[j + k * J, r] = B[j, r] * C[k, r]
    return out


def tucker_23_loops(T, B, C):
    I, J, K = T.shape
    R = B.shape[1]
    out = np.zeros((I, R))
    for i in range(I):
        for r in range(R):
            acc = 0.0
            for j in range(J):
                for k in range(K):
                    acc += T[i, j, k] * B[j, r] * C[k, r]
            out[i, r] = acc
    return out


def gram_kernel_loops(T):
    I, J, K = T.shape
    M = np.zeros((J * K, J * K))
    for j in range(J):
        for k in range(K):
            for j2 in range(J):
                for k2 in range(K):
                    acc = 0.0
                    for i in range(I):
                        acc += T[i, j, k] * T[i, j2, k2]
                    M[j + k * J, j2 + k2 * J] = acc
    return M


def kernel_quad_loops(T, b, c, d, e):
    """Quadruple contraction sum_i T[i,a,b] T[i,g,d] b_a c_b d_g e_d by loops."""
    I, J, K = T.shape
    acc = 0.0
    for alpha in range(J):
        for beta in range(K):
            for gamma in range(J):
                for delta in range(K):
                    inner = 0.0
                    for i in range(I):
                        inner += T[i, alpha, beta] * T[i, gamma, delta]
                    acc += inner * b[alpha] * c[beta] * d[gamma] * e[delta]
    return acc


def lstsq_factor_oracle(T, B, C):
    """LS-optimal leading factor via generic lstsq on the unfolded system."""
    I, J, K = T.shape
    U1 = np.zeros((J * K, I))
    for i in range(I):
        for j in range(J):
            for k in range(K):
                U1[j + k * J, i] = T[i, j, k]
    KR = khatri_rao_loops(B, C)
    At, *_ = np.linalg.lstsq(KR, U1, rcond=None)
    return At.T


def residual_loops(T, A, B, C):
    """Half squared residual by direct summation."""
    I, J, K = T.shape
    R = A.shape[1]
    acc = 0.0
    for i in range(I):
        for j in range(J):
            for k in range(K):
                model = 0.0
                for r in range(R):
                    model += A[i, r] * B[j, r] * C[k, r]
                acc += (T[i, j, k] - model) ** 2
    return 0.5 * acc


def als_to_stall(T, factors, max_iters=300, stall_tol=1e-9, window=5):
    """Plain ALS run until relative progress dies; returns final objective."""
    prev = objective(T, factors)
    run = 0
    for _ in range(max_iters):
        factors = als_sweep(T, factors)
        val = objective(T, factors)
        rel = (prev - val) / max(prev, np.finfo(float).tiny)
        run = run + 1 if rel < stall_tol else 0
        if run >= window or val < 1e-14:
            break
        prev = val
    return objective(T, factors)


def multistart_inf_estimate(T, rank, n_starts=32, seed=0, max_iters=300):
    """Best objective over seeded random-start ALS runs to stall."""
    best = np.inf
    for s in range(n_starts):
        F0 = random_init(T, rank, seed * 1000 + s)
        best = min(best, als_to_stall(T, F0, max_iters=max_iters))
    return best


def _angle_vec(theta):
    return np.array([np.cos(theta), np.sin(theta)])


def rank1_critical_points_2x2x2(T, grid=64, newton_iters=40, tol=1e-12):
    """Critical points of the rank-1 kernel quadratic on the 2x2x2 sphere pair.

    Parametrizes unit vectors b, c by angles, locates zero gradients of
    f(theta, phi) = <vec(b o c), M vec(b o c)> on a coarse grid and refines
    with Newton on the gradient; returns deduplicated (b, c) pairs modulo
    antipodal sign flips.
    """
    from cpkit.reduced import contraction_kernel

    M = contraction_kernel(T).matrix

    def vec_bc(b, c):
        return np.array([b[0] * c[0], b[1] * c[0], b[0] * c[1], b[1] * c[1]])

    def grad(theta, phi):
        b, c = _angle_vec(theta), _angle_vec(phi)
        db, dc = _angle_vec(theta + np.pi / 2), _angle_vec(phi + np.pi / 2)
        v = vec_bc(b, c)
        return np.array([2.0 * vec_bc(db, c) @ (M @ v),
                         2.0 * vec_bc(b, dc) @ (M @ v)])

    def hess(theta, phi, h=1e-6):
        g0 = grad(theta, phi)
        return np.column_stack([(grad(theta + h, phi) - g0) / h,
                                (grad(theta, phi + h) - g0) / h])

    found = []
    thetas = np.linspace(0.0, np.pi, grid, endpoint=False)
    for t0 in thetas:
        for p0 in thetas:
            t, p = t0, p0
            for _ in range(newton_iters):
                g = grad(t, p)
                if np.linalg.norm(g) < tol:
                    break
                H = hess(t, p)
                try:
                    step = np.linalg.solve(H, g)
                except np.linalg.LinAlgError:
                    break
                if np.linalg.norm(step) > 0.5:  # keep Newton local
                    step = 0.5 * step / np.linalg.norm(step)
                t, p = t - step[0], p - step[1]
            else:
                continue
            if np.linalg.norm(grad(t, p)) >= tol:
                continue
            t_mod, p_mod = t % np.pi, p % np.pi
            if not any(min(abs(t_mod - ft), np.pi - abs(t_mod - ft)) < 1e-6
                       and min(abs(p_mod - fp), np.pi - abs(p_mod - fp)) < 1e-6
                       for ft, fp in found):
                found.append((t_mod, p_mod))
    return [(_angle_vec(t), _angle_vec(p)) for t, p in found]


def contract_23(T, b, c):
    return np.einsum("ijk,j,k->i", T, b, c)


def rank1_quadratic_value(T, b, c):
    """Value of the rank-1 kernel quadratic at unit (b, c)."""
    a = contract_23(T, b, c)
    return float(a @ a)


def coupled_power_points(T, grid=13, iters=600, tol=1e-15):
    """Critical points reachable by the coupled power iteration.

    Alternates the two coupled eigen conditions of the rank-1 kernel
    quadratic with sign-fixed normalization, seeded from an angular grid;
    keeps the points the iteration actually converges to (saddles that repel
    the iteration are filtered out by construction).
    """
    from cpkit.reduced import contraction_kernel

    M4 = contraction_kernel(T).matrix
    J, K = T.shape[1], T.shape[2]

    def vec_bc(b, c):
        return np.outer(b, c).reshape(-1, order="F")

    def normalize_signed(v):
        n = np.linalg.norm(v)
        if n == 0.0:
            return None
        v = v / n
        return -v if v[np.argmax(np.abs(v))] < 0 else v

    def step(b, c):
        W = (M4 @ vec_bc(b, c)).reshape(J, K, order="F")
        b2 = normalize_signed(W @ c)
        if b2 is None:
            return None
        W2 = (M4 @ vec_bc(b2, c)).reshape(J, K, order="F")
        c2 = normalize_signed(W2.T @ b2)
        if c2 is None:
            return None
        return b2, c2

    angles = np.linspace(0.0, np.pi, grid, endpoint=False)
    found = []
    for t in angles:
        for p in angles:
            b = np.array([np.cos(t), np.sin(t)])
            c = np.array([np.cos(p), np.sin(p)])
            converged = False
            for _ in range(iters):
                nxt = step(b, c)
                if nxt is None:
                    break
                b2, c2 = nxt
                if max(np.linalg.norm(b2 - b), np.linalg.norm(c2 - c)) < tol:
                    b, c = b2, c2
                    converged = True
                    break
                b, c = b2, c2
            if not converged:
                continue
            if not any(min(np.linalg.norm(b - fb), np.linalg.norm(b + fb)) < 1e-8
                       and min(np.linalg.norm(c - fc),
                               np.linalg.norm(c + fc)) < 1e-8
                       for fb, fc in found):
                found.append((b, c))
    return found


def make_collinear_factors(rng, dims, rank, collinearity):
    """Swampy-style factors built locally for solver tests."""
    mats = []
    for n in dims:
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        cols = []
        for _ in range(rank):
            g = rng.standard_normal(n)
            g /= np.linalg.norm(g)
            col = collinearity * u + np.sqrt(1 - collinearity ** 2) * g
            cols.append(col / np.linalg.norm(col))
        mats.append(np.column_stack(cols))
    return FactorSet(*mats)
