"""Kernel backend selection and argument normalization.

At import time the compiled extension (`cpkit._kernels_cy`) is preferred and
the NumPy module (`cpkit._kernels_np`) is the fallback.  Set the environment
variable ``CPKIT_BACKEND=numpy`` or ``CPKIT_BACKEND=compiled`` to force a
choice; forcing ``compiled`` raises if the extension was not built.

Both backends implement the same five functions with identical semantics:
``khatri_rao``, ``mttkrp``, ``cp_compose``, ``residual_sq``, ``gram_kernel``.
This module wraps them with dtype/contiguity normalization and shape checks.
"""

import os

import numpy as np

from . import _kernels_np

_forced = os.environ.get("CPKIT_BACKEND", "").strip().lower()
if _forced == "numpy":
    _impl = _kernels_np
    BACKEND = "numpy"
elif _forced == "compiled":
    from . import _kernels_cy as _impl  # noqa: F401
    BACKEND = "compiled"
else:
    try:
        from . import _kernels_cy as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_np
        BACKEND = "numpy"


def backend():
    """Name of the active kernel backend: 'compiled' or 'numpy'."""
    return BACKEND


def _arr(x, ndim, name):
    a = np.ascontiguousarray(x, dtype=np.float64)
    if a.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {a.shape}")
    return a


def khatri_rao(B, C):
    """Columnwise Kronecker product, (J*K) x R, first index fastest."""
    B = _arr(B, 2, "B")
    C = _arr(C, 2, "C")
    if B.shape[1] != C.shape[1]:
        raise ValueError(
            f"column counts differ: {B.shape[1]} vs {C.shape[1]}")
    return _impl.khatri_rao(B, C)


def mttkrp(T, X, Y, mode):
    """Contract T with the two kept factors of the given mode.

    mode 1 keeps (B, C), mode 2 keeps (A, C), mode 3 keeps (A, B); the result
    has the shape of the remaining factor.
    """
    T = _arr(T, 3, "T")
    X = _arr(X, 2, "X")
    Y = _arr(Y, 2, "Y")
    if X.shape[1] != Y.shape[1]:
        raise ValueError(
            f"column counts differ: {X.shape[1]} vs {Y.shape[1]}")
    I, J, K = T.shape
    expected = {1: (J, K), 2: (I, K), 3: (I, J)}
    if mode not in expected:
        raise ValueError(f"mode must be 1, 2 or 3, got {mode}")
    if (X.shape[0], Y.shape[0]) != expected[mode]:
        raise ValueError(
            f"factor rows {(X.shape[0], Y.shape[0])} do not match tensor "
            f"dims {expected[mode]} for mode {mode}")
    return _impl.mttkrp(T, X, Y, mode)


def cp_compose(A, B, C):
    """Tensor with entries sum_r A[i,r] B[j,r] C[k,r]."""
    A = _arr(A, 2, "A")
    B = _arr(B, 2, "B")
    C = _arr(C, 2, "C")
    if not (A.shape[1] == B.shape[1] == C.shape[1]):
        raise ValueError("factor column counts differ")
    return _impl.cp_compose(A, B, C)


def residual_sq(T, A, B, C):
    """Squared Frobenius norm of T minus the CP model of (A, B, C)."""
    T = _arr(T, 3, "T")
    A = _arr(A, 2, "A")
    B = _arr(B, 2, "B")
    C = _arr(C, 2, "C")
    if (A.shape[0], B.shape[0], C.shape[0]) != T.shape:
        raise ValueError(
            f"factor rows {(A.shape[0], B.shape[0], C.shape[0])} do not "
            f"match tensor dims {T.shape}")
    if not (A.shape[1] == B.shape[1] == C.shape[1]):
        raise ValueError("factor column counts differ")
    return _impl.residual_sq(T, A, B, C)


def gram_kernel(T):
    """Self-contraction of T over its first index, matricized to JK x JK."""
    T = _arr(T, 3, "T")
    return _impl.gram_kernel(T)
