"""Kernel backends: contracts and compiled/NumPy equivalence."""

import numpy as np
import pytest

from cpkit import _kernels_np
from cpkit import kernels

try:
    from cpkit import _kernels_cy
    BACKENDS = [("numpy", _kernels_np), ("compiled", _kernels_cy)]
except ImportError:
    _kernels_cy = None
    BACKENDS = [("numpy", _kernels_np)]

import helpers


@pytest.fixture(params=BACKENDS, ids=[name for name, _ in BACKENDS])
def backend(request):
    return request.param[1]


def _case(seed=0, dims=(3, 4, 5), rank=2):
    rng = np.random.default_rng(seed)
    T = rng.standard_normal(dims)
    A = rng.standard_normal((dims[0], rank))
    B = rng.standard_normal((dims[1], rank))
    C = rng.standard_normal((dims[2], rank))
    return T, A, B, C


def test_khatri_rao_matches_loops(backend):
    _, _, B, C = _case()
    assert np.allclose(backend.khatri_rao(B, C), helpers.khatri_rao_loops(B, C),
                       rtol=0, atol=1e-14)


def test_mttkrp_matches_einsum(backend):
    T, A, B, C = _case()
    specs = {1: ("ijk,jr,kr->ir", (B, C)),
             2: ("ijk,ir,kr->jr", (A, C)),
             3: ("ijk,ir,jr->kr", (A, B))}
    for mode, (expr, (X, Y)) in specs.items():
        want = np.einsum(expr, T, X, Y)
        got = backend.mttkrp(T, X, Y, mode)
        assert np.allclose(got, want, rtol=1e-12, atol=1e-12)


def test_cp_compose_and_residual(backend):
    T, A, B, C = _case(seed=1)
    model = np.einsum("ir,jr,kr->ijk", A, B, C)
    assert np.allclose(backend.cp_compose(A, B, C), model, atol=1e-12)
    want = float(np.sum((T - model) ** 2))
    assert np.isclose(backend.residual_sq(T, A, B, C), want, rtol=1e-12)


def test_gram_kernel_matches_loops(backend):
    T, *_ = _case(seed=2, dims=(3, 3, 4))
    assert np.allclose(backend.gram_kernel(T), helpers.gram_kernel_loops(T),
                       atol=1e-12)


@pytest.mark.skipif(_kernels_cy is None, reason="compiled backend not built")
def test_backends_agree():
    T, A, B, C = _case(seed=3, dims=(4, 5, 6), rank=3)
    assert np.allclose(_kernels_cy.khatri_rao(B, C), _kernels_np.khatri_rao(B, C),
                       atol=1e-13)
    for mode, (X, Y) in {1: (B, C), 2: (A, C), 3: (A, B)}.items():
        assert np.allclose(_kernels_cy.mttkrp(T, X, Y, mode),
                           _kernels_np.mttkrp(T, X, Y, mode), atol=1e-12)
    assert np.allclose(_kernels_cy.cp_compose(A, B, C),
                       _kernels_np.cp_compose(A, B, C), atol=1e-13)
    assert np.isclose(_kernels_cy.residual_sq(T, A, B, C),
                      _kernels_np.residual_sq(T, A, B, C), rtol=1e-12)
    assert np.allclose(_kernels_cy.gram_kernel(T), _kernels_np.gram_kernel(T),
                       atol=1e-12)


def test_wrapper_validation():
    rng = np.random.default_rng(0)
    B = rng.standard_normal((3, 2))
    C = rng.standard_normal((4, 3))
    with pytest.raises(ValueError):
        kernels.khatri_rao(B, C)
    T = rng.standard_normal((2, 3, 4))
    with pytest.raises(ValueError):
        kernels.mttkrp(T, B, B, 1)  # wrong factor rows for mode 1
    with pytest.raises(ValueError):
        kernels.mttkrp(T, B, B, 4)


def test_backend_reported():
    assert kernels.backend() in ("numpy", "compiled")
