# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner-loop kernels.

Same contracts as `cpkit._kernels_np`; plain C loops, no temporaries.  The
vec convention is first-index-fastest: entry (j, k) of a J x K matrix lives
at flat position j + k*J.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def khatri_rao(double[:, ::1] B, double[:, ::1] C):
    """Columnwise Kronecker product of B (J x R) and C (K x R) -> (J*K, R)."""
    cdef Py_ssize_t J = B.shape[0], R = B.shape[1], K = C.shape[0]
    cdef Py_ssize_t j, k, r
    out_arr = np.empty((J * K, R), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for k in range(K):
        for j in range(J):
            for r in range(R):
                out[j + k * J, r] = B[j, r] * C[k, r]
    return out_arr


def mttkrp(double[:, :, ::1] T, double[:, ::1] X, double[:, ::1] Y, int mode):
    """Matricized tensor times Khatri-Rao product; see the NumPy backend."""
    cdef Py_ssize_t I = T.shape[0], J = T.shape[1], K = T.shape[2]
    cdef Py_ssize_t R = X.shape[1]
    cdef Py_ssize_t i, j, k, r
    cdef double t
    cdef cnp.ndarray out_arr
    cdef double[:, ::1] out
    if mode == 1:
        out_arr = np.zeros((I, R), dtype=np.float64)
        out = out_arr
        for i in range(I):
            for j in range(J):
                for k in range(K):
                    t = T[i, j, k]
                    for r in range(R):
                        out[i, r] += t * X[j, r] * Y[k, r]
    elif mode == 2:
        out_arr = np.zeros((J, R), dtype=np.float64)
        out = out_arr
        for i in range(I):
            for j in range(J):
                for k in range(K):
                    t = T[i, j, k]
                    for r in range(R):
                        out[j, r] += t * X[i, r] * Y[k, r]
    elif mode == 3:
        out_arr = np.zeros((K, R), dtype=np.float64)
        out = out_arr
        for i in range(I):
            for j in range(J):
                for k in range(K):
                    t = T[i, j, k]
                    for r in range(R):
                        out[k, r] += t * X[i, r] * Y[j, r]
    else:
        raise ValueError(f"mode must be 1, 2 or 3, got {mode}")
    return out_arr


def cp_compose(double[:, ::1] A, double[:, ::1] B, double[:, ::1] C):
    """Assemble the I x J x K tensor with entries sum_r A[i,r] B[j,r] C[k,r]."""
    cdef Py_ssize_t I = A.shape[0], J = B.shape[0], K = C.shape[0]
    cdef Py_ssize_t R = A.shape[1]
    cdef Py_ssize_t i, j, k, r
    cdef double acc
    out_arr = np.empty((I, J, K), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    for i in range(I):
        for j in range(J):
            for k in range(K):
                acc = 0.0
                for r in range(R):
                    acc += A[i, r] * B[j, r] * C[k, r]
                out[i, j, k] = acc
    return out_arr


def residual_sq(double[:, :, ::1] T, double[:, ::1] A, double[:, ::1] B,
                double[:, ::1] C):
    """Squared Frobenius norm of T minus the CP model of (A, B, C)."""
    cdef Py_ssize_t I = T.shape[0], J = T.shape[1], K = T.shape[2]
    cdef Py_ssize_t R = A.shape[1]
    cdef Py_ssize_t i, j, k, r
    cdef double acc, total = 0.0
    for i in range(I):
        for j in range(J):
            for k in range(K):
                acc = T[i, j, k]
                for r in range(R):
                    acc -= A[i, r] * B[j, r] * C[k, r]
                total += acc * acc
    return total


def gram_kernel(double[:, :, ::1] T):
    """Self-contraction over the first index, matricized to JK x JK."""
    cdef Py_ssize_t I = T.shape[0], J = T.shape[1], K = T.shape[2]
    cdef Py_ssize_t j, k, j2, k2, i, p, q
    cdef double acc
    out_arr = np.empty((J * K, J * K), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for k in range(K):
        for j in range(J):
            p = j + k * J
            for k2 in range(K):
                for j2 in range(J):
                    q = j2 + k2 * J
                    if q < p:
                        continue
                    acc = 0.0
                    for i in range(I):
                        acc += T[i, j, k] * T[i, j2, k2]
                    out[p, q] = acc
                    out[q, p] = acc
    return out_arr
