from math import factorial

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expmid import (
    ConfigurationError,
    ConvergenceError,
    DenseSpdOperator,
    DimensionError,
    DirichletLaplacian1D,
    PhiEvaluator,
    norm_h,
    phi_scalar,
)
from expmid.phifun import lanczos_phi

mpmath.mp.dps = 50


def phi_mp(k, z):
    z = mpmath.mpf(z)
    if abs(z) < 1:
        return mpmath.fsum(z**j / mpmath.factorial(j + k) for j in range(80))
    # phi_k(z) = (e^z - sum_{j<k} z^j/j!) / z^k
    tail = mpmath.exp(z) - mpmath.fsum(z**j / mpmath.factorial(j) for j in range(k))
    return tail / z**k


def test_phi_at_zero():
    assert phi_scalar(1, 0.0) == 1.0
    assert phi_scalar(2, 0.0) == 0.5
    assert phi_scalar(0, 0.0) == 1.0


def test_phi1_at_minus_one():
    assert phi_scalar(1, -1.0) == pytest.approx(1 - np.exp(-1), rel=1e-15)
    assert phi_scalar(1, -1.0) == pytest.approx(0.6321205588, abs=1e-10)


@pytest.mark.parametrize("k", range(0, 6))
@pytest.mark.parametrize(
    "z", [-1e3, -250.0, -37.5, -4.0, -1.0, -0.99, -0.3, -1e-3, -1e-9, 0.0, 1e-12, 0.2, 0.999, 1.0, 3.0, 17.0]
)
def test_phi_scalar_against_mpmath(k, z):
    expect = float(phi_mp(k, z))
    assert phi_scalar(k, z) == pytest.approx(expect, rel=1e-13)


def test_phi_scalar_vectorized_shape():
    z = np.linspace(-5, 2, 12).reshape(3, 4)
    out = phi_scalar(1, z)
    assert out.shape == (3, 4)
    assert out[1, 2] == phi_scalar(1, z[1, 2])


def test_phi_scalar_rejects_bad_index():
    with pytest.raises(ConfigurationError):
        phi_scalar(-1, 0.5)
    with pytest.raises(ConfigurationError):
        phi_scalar(1.5, 0.5)


@settings(max_examples=200, deadline=None)
@given(
    st.integers(0, 4),
    st.floats(0.1, 50.0) | st.floats(-500.0, -0.1),
)
def test_recurrence(k, z):
    lhs = phi_scalar(k + 1, z)
    rhs = (phi_scalar(k, z) - 1.0 / factorial(k)) / z
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1e4), st.floats(1e-3, 1e6))
def test_phi1_bounded_on_spd_spectrum(tau, lam):
    v = phi_scalar(1, -tau * lam)
    assert 0.0 < v <= 1.0


# operators shared by the action tests
LAP = DirichletLaplacian1D(100)
LAP_EPS = DirichletLaplacian1D(80, length=2.0, diffusion=0.01)


def _eigvec(A, j):
    e = np.zeros(A.dim)
    e[j] = 1.0
    return A.from_eigenbasis(e)


def test_phi_action_zero_vector():
    for method in ("spectral", "dense", "krylov"):
        ev = PhiEvaluator(LAP, method=method)
        assert np.all(ev.phi_action(1, 0.1, np.zeros(99)) == 0.0)
        assert np.all(ev.exp_action(0.1, np.zeros(99)) == 0.0)


@pytest.mark.parametrize("method", ["spectral", "dense", "krylov"])
@pytest.mark.parametrize("j", [0, 7, 60])
def test_eigenvector_oracle(method, j):
    ev = PhiEvaluator(LAP, method=method)
    v = _eigvec(LAP, j)
    lam = LAP.eigenvalues[j]
    tau = 0.05
    np.testing.assert_allclose(ev.phi_action(1, tau, v), phi_scalar(1, -tau * lam) * v, atol=1e-12)
    np.testing.assert_allclose(ev.exp_action(tau, v), np.exp(-tau * lam) * v, atol=1e-12)


def test_small_tau_limit():
    ev = PhiEvaluator(LAP)
    v = np.sin(np.pi * np.arange(1, 100) / 100) + 0.1 * np.cos(3 * np.arange(1, 100))
    tau = 1e-6
    diff = norm_h(LAP, ev.phi_action(1, tau, v) - v)
    # phi_1(-tau A) - I = -tau A phi_2(-tau A) with ||phi_2|| <= 1/2
    assert diff <= 0.5 * tau * norm_h(LAP, LAP.apply(v)) * (1 + 1e-8)


@pytest.mark.parametrize("A", [LAP, LAP_EPS], ids=["unit", "eps"])
@pytest.mark.parametrize("tau", [1 / 320, 0.05, 0.1, 1.0])
def test_exp_phi1_identity(A, tau):
    rng = np.random.default_rng(3)
    for method in ("spectral", "dense", "krylov"):
        ev = PhiEvaluator(A, method=method)
        for _ in range(3):
            v = rng.standard_normal(A.dim)
            lhs = ev.exp_action(tau, v)
            rhs = v - tau * ev.phi_action(1, tau, A.apply(v))
            # relative to v: the right side cancels down to |lhs| << |v| for large tau
            assert norm_h(A, lhs - rhs) <= 1e-10 * norm_h(A, v)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("tau", [1 / 320, 0.1, 1.0])
def test_methods_agree(k, tau):
    rng = np.random.default_rng(11 + k)
    spectral = PhiEvaluator(LAP, method="spectral")
    dense = PhiEvaluator(LAP, method="dense")
    kry = PhiEvaluator(LAP, method="krylov")
    for _ in range(3):
        v = rng.standard_normal(99)
        ref = spectral.phi_action(k, tau, v)
        for other in (dense, kry):
            assert norm_h(LAP, other.phi_action(k, tau, v) - ref) <= 1e-8 * norm_h(LAP, ref)


def test_generic_operator_defaults_to_krylov():
    D = DenseSpdOperator(LAP.matrix(), LAP.lambda1, LAP.mesh_weight)
    ev = PhiEvaluator(D)
    assert ev.method == "krylov"
    v = np.random.default_rng(5).standard_normal(99)
    ref = PhiEvaluator(LAP).phi_action(1, 0.1, v)
    assert norm_h(LAP, ev.phi_action(1, 0.1, v) - ref) <= 1e-8 * norm_h(LAP, ref)
    assert PhiEvaluator(D, method="spectral").phi_action(1, 0.1, v) == pytest.approx(ref, rel=1e-9)


def test_krylov_nonconvergence_reports_residual():
    v = np.random.default_rng(2).standard_normal(99)
    with pytest.raises(ConvergenceError) as info:
        lanczos_phi(LAP.apply, v, 1, 0.1, max_dim=5, tol=1e-12)
    assert info.value.iterations == 5
    assert info.value.residual > 0


def test_krylov_invariant_subspace_exits_early():
    v = _eigvec(LAP, 3) + _eigvec(LAP, 10)
    _, meta = lanczos_phi(LAP.apply, v, 1, 0.1, max_dim=50)
    assert meta["dim"] == 2


def test_evaluator_argument_checks():
    ev = PhiEvaluator(LAP)
    with pytest.raises(DimensionError):
        ev.phi_action(1, 0.1, np.ones(5))
    with pytest.raises(ConfigurationError):
        ev.phi_action(1, 0.0, np.ones(99))
    with pytest.raises(ConfigurationError):
        PhiEvaluator(LAP, method="pade")
