import math

import numpy as np
import pytest

from qfdiv.dpriv import (
    DP_TOL,
    NeighborSet,
    PreconditionError,
    check_dp,
    dp_shortcut_bounds,
    ldp_divergence_bound,
    phi,
    pure_sample_neighbors,
    stein_converse_rate,
)
from qfdiv.fdiv import umegaki
from qfdiv.functions import js, kl
from qfdiv.states import (
    basis_state,
    depolarizing,
    identity_channel,
    maximally_mixed,
    random_channel,
    random_density,
    replacement_channel,
)

TAU = maximally_mixed(2)
ORTH = NeighborSet(((basis_state(2, 0), basis_state(2, 1)),))


def depolarizing_delta(p, eps):
    """Smallest delta for qubit depolarizing on orthogonal pure neighbours."""
    return max(0.0, (1 - p / 2) - math.exp(eps) * p / 2)


def test_neighbor_set_validation():
    with pytest.raises(ValueError):
        NeighborSet(())
    with pytest.raises(ValueError, match="mismatched"):
        NeighborSet(((basis_state(2, 0), basis_state(3, 0)),))
    with pytest.raises(ValueError):
        NeighborSet(((basis_state(2, 0), 2 * basis_state(2, 1)),))
    a, b = ORTH.pairs[0]
    assert ORTH.closure()[1][0] is b and ORTH.dim == 2


def test_check_dp_examples():
    const = replacement_channel(random_density(2, seed=1), 2)
    rep = check_dp(const, pure_sample_neighbors(2, 4), 0.0, 0.0)
    assert rep.passed and rep.dmax_passed and rep.criteria_agree
    ident = identity_channel(2)
    for eps in (0.0, 1.0, 10.0):
        for delta in (0.0, 0.5, 0.99):
            assert not check_dp(ident, ORTH, eps, delta).passed
    assert check_dp(ident, ORTH, 3.0, 1.0).passed


def test_check_dp_parameter_errors():
    with pytest.raises(ValueError):
        check_dp(identity_channel(2), ORTH, -1.0, 0.0)
    with pytest.raises(ValueError):
        check_dp(identity_channel(2), ORTH, 1.0, 1.5)
    with pytest.raises(ValueError):
        check_dp(identity_channel(3), ORTH, 1.0, 0.0)


@pytest.mark.parametrize("p", [0.1, 0.3, 0.6, 0.9])
def test_depolarizing_boundary(p):
    ch = depolarizing(p, TAU)
    for eps in (0.0, 0.5, 1.5):
        d_star = depolarizing_delta(p, eps)
        rep = check_dp(ch, ORTH, eps, min(1.0, d_star))
        assert rep.worst_e == pytest.approx(d_star, abs=1e-9)
        assert rep.passed
        if d_star > 1e-6:
            assert not check_dp(ch, ORTH, eps, d_star - 1e-6).passed


def test_depolarizing_pure_dp_threshold():
    p = 0.4
    ch = depolarizing(p, TAU)
    eps = math.log((2 - p) / p)
    rep = check_dp(ch, pure_sample_neighbors(2, 8), eps, 0.0)
    assert rep.passed and rep.dmax_passed and rep.criteria_agree
    assert rep.worst_dmax == pytest.approx(eps, abs=1e-9)
    rep = check_dp(ch, ORTH, eps - 1e-6, 0.0)
    assert not rep.passed and not rep.dmax_passed


def test_criteria_agree_on_random_instances():
    rng = np.random.default_rng(2)
    for _ in range(50):
        ch = random_channel(2, 2, 3, seed=rng)
        nb = NeighborSet(((random_density(2, seed=rng), random_density(2, seed=rng)),))
        eps = float(rng.uniform(0, 3))
        rep = check_dp(ch, nb, eps, 0.0)
        assert rep.criteria_agree
        assert rep.passed == (rep.worst_dmax <= eps + DP_TOL)


def test_phi_examples():
    assert phi(0, 0) == 0.0
    assert phi(math.log(2), 0) == pytest.approx(0.5)
    assert phi(1.3, 1.0) == 1.0
    with pytest.raises(ValueError):
        phi(-0.1, 0)


def test_ldp_divergence_bound():
    for p in (0.2, 0.5, 0.8):
        ch = depolarizing(p, TAU)
        eps = math.log((2 - p) / p)
        nb = pure_sample_neighbors(2, 8)
        for seed in range(5):
            rho, sigma = random_density(2, seed=seed), random_density(2, seed=seed + 100)
            for f in (kl(), js()):
                rep = ldp_divergence_bound(f, ch, rho, sigma, eps, 0.0, samples=nb)
                assert rep.slack >= -rep.abs_error
    rep = ldp_divergence_bound(kl(), depolarizing(0.5, TAU), TAU, TAU, math.log(3), 0.0)
    assert rep.lhs == pytest.approx(0.0, abs=1e-14) and rep.rhs == pytest.approx(0.0, abs=1e-14)


def test_ldp_precondition_failure_carries_witness():
    with pytest.raises(PreconditionError) as info:
        ldp_divergence_bound(kl(), identity_channel(2), TAU, random_density(2, seed=1), 1.0, 0.0)
    a, b = info.value.witness
    assert a.shape == b.shape == (2, 2)


def test_stein_converse_rate():
    rho, sigma = random_density(2, seed=3), random_density(2, seed=4)
    assert stein_converse_rate(rho, sigma, 0.7, 0.1) == pytest.approx(
        (1 - math.exp(-0.7) * 0.9) * umegaki(rho, sigma))


def test_dp_shortcut_bounds():
    const = replacement_channel(random_density(2, seed=5), 2)
    for rep in dp_shortcut_bounds(const, ORTH, 0.5):
        if rep.bound_name == "dp_pinsker":
            assert rep.lhs == pytest.approx(0.0, abs=1e-13)
    p = 0.3
    ch = depolarizing(p, TAU)
    eps = math.log((2 - p) / p)
    reps = dp_shortcut_bounds(ch, pure_sample_neighbors(2, 6), eps, seed=1)
    assert {r.bound_name for r in reps} == {"dp_pinsker", "dp_continuity"}
    assert all(r.slack >= -1e-12 for r in reps)
    r = random_density(2, seed=6)
    same = dp_shortcut_bounds(ch, NeighborSet(((r, r),)), eps, taus=[ch(r)])
    assert all(abs(x.lhs) < 1e-13 and x.rhs == pytest.approx(0, abs=1e-13) for x in same)
    with pytest.raises(PreconditionError):
        dp_shortcut_bounds(identity_channel(2), ORTH, 1.0)
