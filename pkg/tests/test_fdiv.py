import math

import numpy as np
import pytest
import scipy.linalg as sla
from scipy import integrate as si

from qfdiv.fdiv import (
    chi2_closed,
    classical_f_div,
    d_f_degroot,
    d_f_generalized,
    d_f_integral,
    d_f_single_integral,
    d_f_upper_bound,
    kl_divergence,
    local_chi2_limit,
    skew_divergence,
    umegaki,
    von_neumann_entropy,
)
from qfdiv.functions import chi2, hellinger, js, kl, lecam, linear, parse_function
from qfdiv.states import basis_state, maximally_mixed, random_density

from conftest import commuting_pairs, diag, random_pairs

KL_DIAG = 0.9 * math.log(1.8) + 0.1 * math.log(0.2)


def hockey_oracle(a, b, g):
    x = a - g * b
    return (np.linalg.svd(x, compute_uv=False).sum() + np.trace(x).real) / 2 - max(
        np.trace(x).real, 0.0)


def integral_oracle(f, rho, sigma):
    """Both hockey-stick branches via scipy.integrate.quad and an SVD-based E_gamma."""
    def branch(a, b, weight):
        roots = sla.eigh(a, b, eigvals_only=True)
        top = roots[-1]
        if top <= 1:
            return 0.0
        pts = [r for r in roots if 1 < r < top]
        val, _ = si.quad(lambda g: weight(g) * hockey_oracle(a, b, g), 1, top,
                         points=pts or None, epsabs=1e-13, epsrel=1e-11, limit=200)
        return val

    fpp = lambda g: float(f.eval_fpp([g])[0])
    return branch(rho, sigma, fpp) + branch(sigma, rho, lambda g: fpp(1 / g) / g**3)


def bkm_chi2_oracle(rho, sigma):
    # int_0^inf Tr[(rho-sigma)(sigma+s)^-1 (rho-sigma)(sigma+s)^-1] ds
    d = rho - sigma
    eye = np.eye(len(rho))

    def integrand(s):
        r = np.linalg.inv(sigma + s * eye)
        return np.trace(d @ r @ d @ r).real

    return si.quad(integrand, 0, np.inf, epsabs=1e-13, epsrel=1e-11, limit=200)[0]


def test_diagonal_examples(diagonal_pair):
    rho, sigma = diagonal_pair
    assert d_f_integral(kl(), rho, rho).value == pytest.approx(0.0, abs=1e-14)
    v = d_f_integral(kl(), rho, sigma)
    assert v.value == pytest.approx(KL_DIAG, abs=max(1e-9, 10 * v.abs_error))
    assert KL_DIAG == pytest.approx(0.368064, abs=5e-7)
    assert umegaki(rho, sigma) == pytest.approx(KL_DIAG, abs=1e-14)
    assert chi2_closed(rho, sigma) == pytest.approx(0.64, abs=1e-14)
    assert classical_f_div([0.9, 0.1], [0.5, 0.5], kl()) == pytest.approx(KL_DIAG)
    assert classical_f_div([0.9, 0.1], [0.5, 0.5], chi2()) == pytest.approx(0.64)
    assert classical_f_div([0.2, 0.8], [0.2, 0.8], js()) == 0.0


def test_orthogonal_hellinger_half():
    v = d_f_integral(hellinger(0.5), basis_state(2, 0), basis_state(2, 1))
    assert v.value == pytest.approx(2.0, abs=1e-7)
    assert v.support_flag == "disjoint"
    assert d_f_upper_bound(hellinger(0.5), basis_state(2, 0), basis_state(2, 1)) == 2.0


def test_support_violation_is_infinite():
    a, b = basis_state(2, 0), basis_state(2, 1)
    assert umegaki(a, b) == math.inf
    assert d_f_integral(kl(), a, b).value == math.inf
    assert chi2_closed(a, maximally_mixed(2) * 0 + b) == math.inf
    psi = random_density(3, 1, seed=1)
    full = random_density(3, seed=2)
    assert d_f_integral(kl(), full, psi).value == math.inf
    assert d_f_integral(kl(), psi, full).value == pytest.approx(umegaki(psi, full), abs=1e-7)


def test_umegaki_matches_logm():
    for rho, sigma in random_pairs(60, seed=3):
        want = np.trace(rho @ (sla.logm(rho) - sla.logm(sigma))).real
        assert umegaki(rho, sigma) == pytest.approx(want, abs=1e-9)


def test_entropy_of_maximally_mixed():
    assert von_neumann_entropy(maximally_mixed(4)) == pytest.approx(math.log(4))
    assert von_neumann_entropy(basis_state(3, 1)) == pytest.approx(0.0, abs=1e-15)


def test_chi2_closed_matches_resolvent_integral():
    for rho, sigma in random_pairs(30, seed=4):
        assert chi2_closed(rho, sigma) == pytest.approx(bkm_chi2_oracle(rho, sigma), rel=1e-8)


@pytest.mark.parametrize("spec", ["hellinger:alpha=0.5", "hellinger:alpha=3", "js",
                                  "lecam:lambda=0.3", "skew:base=kl,lambda=0.3,mu=0.6"])
def test_integral_matches_scipy_oracle(spec):
    f = parse_function(spec)
    for rho, sigma in random_pairs(6, dims=(2, 3), seed=5):
        v = d_f_integral(f, rho, sigma)
        assert v.value == pytest.approx(integral_oracle(f, rho, sigma), abs=max(1e-8, 10 * v.abs_error))


def test_cross_check_evaluators_agree(diagonal_pair):
    rho, sigma = diagonal_pair
    a = d_f_integral(kl(), rho, sigma)
    b = d_f_single_integral(kl(), rho, sigma)
    assert abs(a.value - b.value) <= 2 * 1e-8 * a.value
    for rho, sigma in random_pairs(30, seed=6):
        for f in (kl(), chi2(), hellinger(0.5)):
            ref = d_f_integral(f, rho, sigma)
            for ev in (d_f_single_integral, d_f_degroot):
                other = ev(f, rho, sigma)
                assert other.value == pytest.approx(
                    ref.value, abs=max(1e-7, 10 * (ref.abs_error + other.abs_error)))


def test_cross_check_with_support_defects():
    psi = random_density(3, 2, seed=7)
    full = random_density(3, seed=8)
    for f in (hellinger(0.5), js()):
        for a, b in ((psi, full), (full, psi)):
            ref = d_f_integral(f, a, b)
            for ev in (d_f_single_integral, d_f_degroot):
                assert ev(f, a, b).value == pytest.approx(ref.value, abs=1e-6)


def test_linear_generator_gives_zero():
    rho, sigma = random_pairs(1, seed=9)[0]
    assert d_f_single_integral(linear(0.7), rho, sigma).value == 0.0
    assert d_f_integral(linear(0.7), rho, sigma).value == 0.0


def test_chi2_integral_matches_closed_form():
    for rho, sigma in random_pairs(30, seed=10):
        v = d_f_integral(chi2(), rho, sigma)
        assert v.value == pytest.approx(chi2_closed(rho, sigma), abs=max(1e-7, 10 * v.abs_error))


def test_local_chi2_limit():
    for rho, sigma in random_pairs(5, dims=(2,), seed=11):
        c = chi2_closed(rho, sigma)
        assert local_chi2_limit(kl(), rho, sigma) == pytest.approx(c, rel=1e-4)
        assert local_chi2_limit(chi2(), rho, sigma) == pytest.approx(2 * c, rel=1e-4)
    assert local_chi2_limit(kl(), rho, rho) == pytest.approx(0.0, abs=1e-10)


def test_skew_examples():
    for rho, sigma in random_pairs(10, dims=(2, 3), seed=12):
        mix = (rho + sigma) / 2
        jsd = 0.5 * umegaki(rho, mix) + 0.5 * umegaki(sigma, mix)
        assert skew_divergence(kl(), 0.5, 0.5, rho, sigma).value == pytest.approx(jsd, abs=1e-7)
        assert skew_divergence(kl(), 0.0, 0.0, rho, sigma).value == pytest.approx(
            umegaki(rho, sigma), abs=1e-7)
        lam = 0.3
        m = lam * rho + (1 - lam) * sigma
        want = lam * chi2_closed(rho, m) + (1 - lam) * chi2_closed(sigma, m)
        assert d_f_integral(lecam(lam), rho, sigma).value == pytest.approx(want, abs=1e-7)


def test_upper_bound_examples(diagonal_pair):
    rho, sigma = diagonal_pair
    assert d_f_upper_bound(kl(), rho, rho) >= 0
    # f(x) - x f'(x) at x = 1/5 plus f'(1.8) for f = x ln x
    want = -0.2 + math.log(1.8) + 1
    assert d_f_upper_bound(kl(), rho, sigma) == pytest.approx(want)
    assert want >= KL_DIAG
    for rho, sigma in random_pairs(30, seed=13):
        for f in (kl(), js(), hellinger(0.5), hellinger(2)):
            assert d_f_upper_bound(f, rho, sigma) >= d_f_integral(f, rho, sigma).value - 1e-9


def test_classical_boundary_conventions():
    f = hellinger(0.5)
    assert classical_f_div([1, 0], [0, 1], f) == pytest.approx(2.0)
    assert classical_f_div([1, 0], [0.5, 0.5], kl()) == pytest.approx(math.log(2))
    assert classical_f_div([0.5, 0.5], [1, 0], kl()) == math.inf
    with pytest.raises(ValueError):
        classical_f_div([1.0], [0.5, 0.5], kl())


def test_commuting_reduction_with_zeros():
    for p, q, rho, sigma in commuting_pairs(10, dims=(3,), seed=14, zeros=True):
        for f in (js(), hellinger(0.5), lecam(0.4)):
            assert d_f_integral(f, rho, sigma).value == pytest.approx(
                classical_f_div(p, q, f), abs=1e-7)


def test_generalized_scaling():
    rho, sigma = diag(0.9, 0.1), diag(0.5, 0.5)
    v = d_f_generalized(kl(), 2 * rho, sigma)
    assert v.value == pytest.approx(2 * KL_DIAG + 2 * math.log(2), abs=1e-7)
    assert 2 * KL_DIAG + 2 * math.log(2) == pytest.approx(2.12242, abs=5e-6)
    r, s = random_pairs(1, seed=15)[0]
    assert d_f_generalized(kl(), r, s).value == pytest.approx(d_f_integral(kl(), r, s).value,
                                                              abs=1e-9)
    a, b, alpha = 2.0, 3.0, 2.0
    h = d_f_integral(hellinger(alpha), r, s).value
    c = a**alpha * b ** (1 - alpha)
    want = (c - a) / (alpha - 1) + c * h
    assert d_f_generalized(hellinger(alpha), a * r, b * s).value == pytest.approx(want, abs=1e-7)


def test_input_validation():
    rho = random_density(2, seed=1)
    with pytest.raises(ValueError):
        d_f_integral(kl(), rho, rho, rel_tol=1e-20)
    with pytest.raises(ValueError):
        d_f_integral(kl(), diag(1.2, -0.2), rho)
    assert kl_divergence(rho, rho).value == pytest.approx(0.0, abs=1e-14)


def test_local_chi2_limit_with_small_sigma_eigenvalue():
    # sigma's smallest eigenvalue is 1e-3, so a fixed grid starting at 0.1 lies
    # outside the radius of convergence of the expansion
    rho, sigma = diag(0.2, 0.3, 0.5), diag(0.001, 0.499, 0.5)
    want = 0.2**2 / 0.001 + 0.3**2 / 0.499 + 0.5**2 / 0.5 - 1
    assert local_chi2_limit(kl(), rho, sigma) == pytest.approx(want, rel=1e-4)
    # an explicit grid is still honoured
    coarse = local_chi2_limit(kl(), rho, sigma, lambdas=(0.1, 0.05, 0.025, 0.0125))
    assert abs(coarse - want) > 1e-2 * want
