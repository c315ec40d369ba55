"""NumPy implementations of the inner-loop kernels.

This is the fallback backend when the compiled extension is unavailable and
the reference the compiled kernels are checked against.  All functions assume
C-contiguous float64 inputs; `cpkit.kernels` normalizes arguments before
dispatching here.

Index conventions (0-based): the vectorization of a J x K matrix places entry
(j, k) at position j + k*J (first index fastest).  Khatri-Rao columns, the
mode-1 unfolding rows and the contraction-kernel matricization all follow
this same ordering.
"""

import numpy as np


def khatri_rao(B, C):
    """Columnwise Kronecker product of B (J x R) and C (K x R) -> (J*K, R).

    Column r holds B[j, r] * C[k, r] at row j + k*J.
    """
    J, R = B.shape
    K = C.shape[0]
    return (B[:, None, :] * C[None, :, :]).reshape(J * K, R, order="F")


def mttkrp(T, X, Y, mode):
    """Matricized tensor times Khatri-Rao product of the two kept factors.

    mode 1: out[i, r] = sum_{j,k} T[i,j,k] X[j,r] Y[k,r]   (X: J x R, Y: K x R)
    mode 2: out[j, r] = sum_{i,k} T[i,j,k] X[i,r] Y[k,r]   (X: I x R, Y: K x R)
    mode 3: out[k, r] = sum_{i,j} T[i,j,k] X[i,r] Y[j,r]   (X: I x R, Y: J x R)
    """
    I, J, K = T.shape
    if mode == 1:
        U = T.transpose(1, 2, 0).reshape(J * K, I, order="F")
        return U.T @ khatri_rao(X, Y)
    if mode == 2:
        U = T.transpose(2, 0, 1).reshape(K * I, J, order="F")
        return U.T @ khatri_rao(Y, X)
    if mode == 3:
        U = T.reshape(I * J, K, order="F")
        return U.T @ khatri_rao(X, Y)
    raise ValueError(f"mode must be 1, 2 or 3, got {mode}")


def cp_compose(A, B, C):
    """Assemble the I x J x K tensor with entries sum_r A[i,r] B[j,r] C[k,r]."""
    I = A.shape[0]
    J = B.shape[0]
    K = C.shape[0]
    M = khatri_rao(B, C) @ A.T
    return np.ascontiguousarray(M.reshape(J, K, I, order="F").transpose(2, 0, 1))


def residual_sq(T, A, B, C):
    """Squared Frobenius norm of T minus the CP model of (A, B, C)."""
    D = T - cp_compose(A, B, C)
    return float(np.vdot(D, D))


def gram_kernel(T):
    """Self-contraction of T over its first index, matricized to JK x JK.

    Entry (j + k*J, j' + k'*J) equals sum_i T[i,j,k] * T[i,j',k'].
    """
    I, J, K = T.shape
    U = T.transpose(1, 2, 0).reshape(J * K, I, order="F")
    return U @ U.T
