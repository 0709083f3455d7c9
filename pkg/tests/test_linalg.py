import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from qfdiv import linalg
from qfdiv.linalg import (
    EigenError,
    SupportError,
    eigh,
    hermitian,
    inverse_log_mean,
    matrix_log,
    matrix_power,
    matrix_sqrt,
    positive_part_trace,
    pseudo_inverse_sqrt,
    support_projector,
    tensor,
    trace_norm,
)
from qfdiv.states import random_density

from conftest import diag


def random_hermitian(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


def test_diagonal_spectrum_and_vectors():
    w, v = eigh(diag(0.1, 0.9))
    np.testing.assert_allclose(w, [0.1, 0.9])
    np.testing.assert_allclose(np.abs(v), np.eye(2), atol=1e-15)


def test_pauli_x_spectrum():
    w, _ = eigh(hermitian([[0, 1], [1, 0]]))
    np.testing.assert_allclose(w, [-1, 1], atol=1e-15)


def test_qutrit_state_is_psd_with_unit_trace(qutrit_pair):
    w, _ = eigh(qutrit_pair[0])
    assert w.min() >= -1e-15
    assert w.sum() == pytest.approx(1.0, abs=1e-14)


def test_eigh_reconstructs_random_hermitian():
    rng = np.random.default_rng(0)
    for k in range(1000):
        d = int(rng.integers(1, 17))
        h = random_hermitian(rng, d)
        w, v = eigh(h)
        assert np.all(np.diff(w) >= 0)
        np.testing.assert_allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-12)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(d), atol=1e-12)


def test_eigh_phase_convention_is_deterministic():
    rng = np.random.default_rng(1)
    h = random_hermitian(rng, 5)
    v = eigh(h).eigenvectors
    pivots = v[np.argmax(np.abs(v), axis=0), np.arange(5)]
    np.testing.assert_allclose(pivots.imag, 0, atol=1e-15)
    assert np.all(pivots.real > 0)
    np.testing.assert_array_equal(v, eigh(h.copy()).eigenvectors)


def test_eigensolver_failure_is_reported(monkeypatch):
    def boom(_):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(linalg.np.linalg, "eigh", boom)
    with pytest.raises(EigenError, match="dim=2"):
        eigh(np.eye(2, dtype=complex))


@pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros(3), [[np.nan, 0], [0, 1]]])
def test_hermitian_rejects_malformed(bad):
    with pytest.raises(ValueError):
        hermitian(bad)


def test_positive_part_examples(diagonal_pair):
    rho, sigma = diagonal_pair
    assert positive_part_trace(diag(0.4, -0.4)) == pytest.approx(0.4)
    assert positive_part_trace(rho - 1.5 * sigma) == pytest.approx(0.15, abs=1e-15)
    assert positive_part_trace(random_density(3, seed=4)) == pytest.approx(1.0, abs=1e-14)


def test_trace_norm_and_positive_part_agree_with_svd():
    rng = np.random.default_rng(2)
    for _ in range(200):
        h = random_hermitian(rng, int(rng.integers(1, 7)))
        sv = np.linalg.svd(h, compute_uv=False)
        assert trace_norm(h) == pytest.approx(sv.sum(), rel=1e-12)
        # (|H| + H)/2 has trace Tr H_+
        assert positive_part_trace(h) == pytest.approx((sv.sum() + np.trace(h).real) / 2,
                                                       rel=1e-12, abs=1e-12)
    assert trace_norm(diag(0.4, -0.4)) == pytest.approx(0.8)


def test_tensor_identity():
    np.testing.assert_array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))


def test_matrix_log_diagonal():
    np.testing.assert_allclose(matrix_log(diag(np.e, 1.0)), diag(1.0, 0.0), atol=1e-15)


def test_matrix_functions_match_scipy():
    rng = np.random.default_rng(3)
    for _ in range(100):
        d = int(rng.integers(2, 6))
        rho = random_density(d, seed=rng)
        np.testing.assert_allclose(matrix_log(rho), sla.logm(rho), atol=1e-8)
        np.testing.assert_allclose(matrix_sqrt(rho), sla.sqrtm(rho), atol=1e-8)
        t = float(rng.uniform(-2, 2))
        np.testing.assert_allclose(matrix_power(rho, t), sla.fractional_matrix_power(rho, t),
                                   rtol=1e-7, atol=1e-8)
        np.testing.assert_allclose(pseudo_inverse_sqrt(rho), sla.inv(sla.sqrtm(rho)),
                                   rtol=1e-7, atol=1e-8)


def test_singular_operator_support_conventions():
    psi = random_density(3, 1, seed=5)
    proj = support_projector(psi)
    np.testing.assert_allclose(proj, psi, atol=1e-12)
    np.testing.assert_allclose(matrix_power(psi, 0), proj, atol=1e-12)
    np.testing.assert_allclose(matrix_power(psi, -1), psi, atol=1e-10)
    np.testing.assert_allclose(matrix_log(psi), np.zeros((3, 3)), atol=1e-12)
    with pytest.raises(SupportError):
        matrix_power(psi, -0.5, on_support=False)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 10), st.floats(1e-6, 10))
def test_inverse_log_mean_matches_direct_formula(x, y):
    got = float(inverse_log_mean(np.array(x), np.array(y)))
    if abs(x / y - 1) > 1e-3:
        want = (np.log(x) - np.log(y)) / (x - y)
    else:
        # Taylor of log1p around the diagonal, computed in extended steps
        r = x / y - 1
        want = sum((-r) ** k / (k + 1) for k in range(12)) / y
    assert got == pytest.approx(want, rel=1e-10)
