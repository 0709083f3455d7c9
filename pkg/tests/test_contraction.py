import math

import numpy as np
import pytest

from qfdiv.contraction import (
    OptimizerConfig,
    depol_pullback_divergence,
    eta_f_sampled,
    eta_gamma,
    eta_tr,
    eta_x2_global,
    eta_x2_local,
    f_mutual_information,
    f_mutual_information_embedded,
    less_noisy_falsifier,
    traceless_basis,
)
from qfdiv.fdiv import chi2_closed, d_f_integral
from qfdiv.functions import chi2, hellinger, js, kl, linear
from qfdiv.states import (
    CQState,
    basis_state,
    depolarizing,
    identity_channel,
    maximally_mixed,
    random_channel,
    random_density,
    replacement_channel,
)

CFG = OptimizerConfig(restarts=6, seed=0)
TAU = maximally_mixed(2)
PAULIS = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0])]


def bloch_matrix(ch):
    # T_ij = Tr(P_i N(P_j))/2, the linear part of the affine Bloch map
    return np.array([[np.trace(a @ sum(k @ b @ k.conj().T for k in ch.kraus)).real / 2
                      for b in PAULIS] for a in PAULIS])


def test_eta_gamma_examples():
    assert eta_gamma(identity_channel(2), 1.0, CFG).value == pytest.approx(1.0, abs=1e-9)
    const = replacement_channel(random_density(2, seed=1), 2)
    assert eta_gamma(const, 1.7, CFG).value == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        eta_gamma(identity_channel(2), 0.5)


@pytest.mark.parametrize("p", [0.1, 0.25, 0.5])
def test_depolarizing_closed_forms(p):
    ch = depolarizing(p, TAU)
    assert eta_tr(ch, CFG).value == pytest.approx(1 - p, abs=1e-3)
    for g in (1.3, 2.0):
        want = max(0.0, (1 - p / 2) - g * p / 2)
        assert eta_gamma(ch, g, CFG).value == pytest.approx(want, abs=1e-3)
    assert eta_x2_local(ch, TAU).value == pytest.approx((1 - p) ** 2, abs=1e-3)
    sigma = random_density(2, seed=2)
    assert eta_tr(depolarizing(p, sigma), CFG).value == pytest.approx(1 - p, abs=1e-3)


def test_eta_tr_matches_bloch_singular_value():
    for seed in range(8):
        ch = random_channel(2, 2, 2, seed=seed)
        want = np.linalg.svd(bloch_matrix(ch), compute_uv=False)[0]
        assert eta_tr(ch, CFG).value == pytest.approx(want, abs=1e-3)


def test_eta_tr_witness_is_orthogonal_pure_pair():
    est = eta_tr(random_channel(2, 3, 2, seed=3), CFG)
    psi, phi = est.witness["psi"], est.witness["phi"]
    assert abs(np.trace(psi @ phi)) < 1e-12
    assert np.trace(psi @ psi).real == pytest.approx(1.0)
    assert est.kind == "optimized_lower_bound"


def test_traceless_basis_is_orthonormal():
    for d in (2, 3, 4):
        b = traceless_basis(d)
        assert len(b) == d * d - 1
        gram = np.array([[np.trace(x.conj().T @ y) for y in b] for x in b])
        np.testing.assert_allclose(gram, np.eye(d * d - 1), atol=1e-14)
        assert all(abs(np.trace(x)) < 1e-14 for x in b)


def test_eta_x2_local_examples():
    sigma = random_density(3, seed=4)
    assert eta_x2_local(identity_channel(3), sigma).value == pytest.approx(1.0)
    assert eta_x2_local(replacement_channel(sigma, 3), sigma).value == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        eta_x2_local(identity_channel(2), basis_state(2, 0))


def test_eta_x2_local_matches_finite_difference_ratios():
    rng = np.random.default_rng(5)
    for seed in range(6):
        ch = random_channel(2, 2, 2, seed=seed)
        sigma = random_density(2, seed=rng)
        est = eta_x2_local(ch, sigma)
        delta = est.witness["direction"]
        t = 1e-4 * np.linalg.eigvalsh(sigma)[0] / np.abs(np.linalg.eigvalsh(delta)).max()
        rho = sigma + t * delta
        ratio = chi2_closed(ch(rho), ch(sigma)) / chi2_closed(rho, sigma)
        assert ratio == pytest.approx(est.value, rel=1e-3)
        for _ in range(20):
            h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            h = h + h.conj().T
            h -= np.trace(h) / 2 * np.eye(2)
            s = 1e-4 * np.linalg.eigvalsh(sigma)[0] / np.abs(np.linalg.eigvalsh(h)).max()
            r = sigma + s * h
            assert chi2_closed(ch(r), ch(sigma)) / chi2_closed(r, sigma) <= est.value * (1 + 1e-3)


def test_eta_x2_global_bounds_local_and_trace():
    ch = random_channel(2, 2, 2, seed=6)
    glob = eta_x2_global(ch, OptimizerConfig(restarts=2, seed=0))
    assert glob.value >= eta_x2_local(ch, TAU).value - 1e-9
    assert glob.value <= eta_tr(ch, CFG).value + 2e-3


def test_eta_f_sampled_examples():
    p = 0.3
    ch = depolarizing(p, TAU)
    est = eta_f_sampled(ch, chi2(), n_samples=20, fixed_sigma=TAU)
    assert est.value == pytest.approx((1 - p) ** 2, abs=1e-3)
    assert est.kind == "sampled_lower_bound"
    assert eta_f_sampled(identity_channel(2), kl(), n_samples=5, fixed_sigma=TAU).value == \
        pytest.approx(1.0)
    ch = random_channel(2, 2, 2, seed=7)
    cfg = OptimizerConfig(restarts=2, seed=0)
    etr = eta_tr(ch, CFG).value
    assert eta_f_sampled(ch, kl(), n_samples=20, cfg=cfg).value <= etr + 2e-3
    with pytest.raises(ValueError):
        eta_f_sampled(ch, linear(0.5))


def test_depol_pullback_identity():
    rng = np.random.default_rng(8)
    for _ in range(10):
        rho, sigma = random_density(2, seed=rng), random_density(2, seed=rng)
        p = float(rng.uniform())
        for f in (kl(), js()):
            left, right = depol_pullback_divergence(f, p, sigma, rho, return_both=True)
            assert left.value == pytest.approx(right.value,
                                               abs=max(1e-8, 10 * (left.abs_error + right.abs_error)))
        left = depol_pullback_divergence(chi2(), p, sigma, rho)
        assert left.value == pytest.approx((1 - p) ** 2 * chi2_closed(rho, sigma), abs=1e-8)
    assert depol_pullback_divergence(kl(), 0.0, sigma, rho).value == pytest.approx(
        d_f_integral(kl(), rho, sigma).value, abs=1e-10)
    assert depol_pullback_divergence(kl(), 1.0, sigma, rho).value == pytest.approx(0.0, abs=1e-12)


def test_mutual_information():
    r = random_density(2, seed=9)
    same = CQState(np.array([0.3, 0.7]), (r, r))
    assert f_mutual_information(kl(), same).value == pytest.approx(0.0, abs=1e-12)
    bit = CQState(np.array([0.5, 0.5]), (basis_state(2, 0), basis_state(2, 1)))
    assert f_mutual_information(kl(), bit).value == pytest.approx(math.log(2), abs=1e-8)
    cq = CQState(np.array([0.2, 0.5, 0.3]), tuple(random_density(2, seed=s) for s in (1, 2, 3)))
    for f in (kl(), js(), hellinger(0.5)):
        a = f_mutual_information(f, cq)
        b = f_mutual_information_embedded(f, cq)
        assert a.value == pytest.approx(b.value, abs=max(1e-8, 10 * (a.abs_error + b.abs_error)))


def test_less_noisy_falsifier():
    ident = identity_channel(2)
    dep = depolarizing(0.5, TAU)
    assert less_noisy_falsifier(dep, dep, kl(), n_samples=10)["status"] == "inconclusive"
    assert less_noisy_falsifier(ident, dep, kl(), n_samples=20)["status"] == "inconclusive"
    rep = less_noisy_falsifier(depolarizing(0.9, TAU), ident, kl(), n_samples=20)
    assert rep["status"] == "falsified" and rep["n_checked"] <= 3
    with pytest.raises(ValueError):
        less_noisy_falsifier(ident, identity_channel(3), kl())
