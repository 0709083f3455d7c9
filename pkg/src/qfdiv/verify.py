"""Seeded property batteries behind ``qfdiv verify``.

Each battery draws inputs from ``numpy.random.default_rng([seed, dim, k])``
so any single failure can be replayed from its seed and dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds, dpriv
from .contraction import OptimizerConfig, eta_tr, eta_x2_local
from .fdiv import (
    classical_f_div,
    d_f_degroot,
    d_f_integral,
    d_f_single_integral,
    umegaki,
)
from .functions import hellinger, js, kl, parse_function
from .hockey import d_max, e_gamma_unchecked, trace_distance
from .renyi import d_alpha, geometric_renyi, kappa_bound, measured_renyi_lower, renyi_bound_chain
from .states import (
    depolarizing,
    haar_unitary,
    maximally_mixed,
    random_channel,
    random_density,
)

SUITES = ("hockey", "fdiv", "renyi", "contraction", "bounds", "dp")

# Registry members instantiated with representative parameters.
SAMPLE_FUNCTIONS = (
    "kl", "hellinger:alpha=0.5", "hellinger:alpha=2", "chi2", "js", "lecam:lambda=0.3",
    "linear:b=0.7", "skew:base=kl,lambda=0.3,mu=0.6", "depol_pullback:base=kl,p=0.2",
    "conj:base=kl",
)


@dataclass
class Property:
    """Running tally for one named property; ``worst_slack`` is the most negative margin seen."""

    name: str
    checks: int = 0
    violations: int = 0
    worst_slack: float = math.inf
    failures: list = field(default_factory=list)

    def record(self, slack: float, tol: float, where: str = "") -> None:
        self.checks += 1
        if slack < self.worst_slack:
            self.worst_slack = slack
        if slack < -tol:
            self.violations += 1
            if len(self.failures) < 5:
                self.failures.append({"where": where, "slack": slack, "tol": tol})

    def as_dict(self) -> dict:
        return {"checks": self.checks, "violations": self.violations,
                "worst_slack": self.worst_slack, "failures": self.failures}


class Battery:
    def __init__(self):
        self.props: dict[str, Property] = {}
        self.reports: list[bounds.BoundReport] = []

    def __getitem__(self, name: str) -> Property:
        return self.props.setdefault(name, Property(name))

    def bound(self, report: bounds.BoundReport, where: str, factor: float = 10.0) -> None:
        self.reports.append(report)
        slack = report.slack
        if math.isnan(slack):
            slack = -math.inf
        self[report.bound_name].record(slack, factor * report.abs_error + 1e-12, where)


def _rng(seed: int, dim: int, k: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, dim, k])


def _pair(rng, dim):
    return random_density(dim, seed=rng), random_density(dim, seed=rng)


def _commuting_pair(rng, dim):
    u = haar_unitary(dim, seed=rng)
    p, q = rng.dirichlet(np.ones(dim)), rng.dirichlet(np.ones(dim))
    return p, q, u @ np.diag(p) @ u.conj().T, u @ np.diag(q) @ u.conj().T


def hockey_battery(bat: Battery, seed: int, dim: int) -> None:
    rng = _rng(seed, dim)
    rho, sigma = _pair(rng, dim)
    where = f"seed={seed} dim={dim}"
    gammas = np.linspace(1.0, 6.0, 41)
    e = e_gamma_unchecked(rho, sigma, gammas)
    bat["e_gamma_in_unit_interval"].record(min(e.min(), 1 - e.max()), 1e-12, where)
    bat["e1_is_trace_distance"].record(-abs(e[0] - trace_distance(rho, sigma)), 1e-12, where)
    bat["e_gamma_nonincreasing"].record(-float(np.max(np.diff(e))), 1e-12, where)
    bat["e_gamma_convex"].record(float(np.min(np.diff(e, 2))), 1e-12, where)
    top = math.exp(d_max(rho, sigma))
    beyond = e_gamma_unchecked(rho, sigma, [top * (1 + 1e-9), 2 * top])
    bat["e_gamma_vanishes_past_dmax"].record(-float(beyond.max()), 1e-10, where)
    ch = random_channel(dim, dim, 2, seed=rng)
    out = e_gamma_unchecked(ch(rho), ch(sigma), gammas)
    bat["e_gamma_data_processing"].record(float(np.min(e - out)), 1e-12, where)


def fdiv_battery(bat: Battery, seed: int, dim: int) -> None:
    rng = _rng(seed, dim, 1)
    rho, sigma = _pair(rng, dim)
    where = f"seed={seed} dim={dim}"
    ref = umegaki(rho, sigma)
    for name, fn in (("integral", d_f_integral), ("single_integral", d_f_single_integral),
                     ("degroot", d_f_degroot)):
        v = fn(kl(), rho, sigma)
        bat[f"umegaki_{name}"].record(-abs(v.value - ref), max(1e-7, 10 * v.abs_error), where)
    ch = random_channel(dim, dim, 2, seed=rng)
    for f in (kl(), hellinger(0.5), js()):
        before = d_f_integral(f, rho, sigma)
        after = d_f_integral(f, ch(rho), ch(sigma))
        bat[f"data_processing_{f.name}"].record(before.value - after.value,
                                                10 * (before.abs_error + after.abs_error), where)
    p, q, a, b = _commuting_pair(rng, dim)
    for spec in SAMPLE_FUNCTIONS:
        f = parse_function(spec)
        v = d_f_integral(f, a, b)
        want = classical_f_div(p, q, f)
        bat["classical_reduction"].record(-abs(v.value - want), max(1e-7, 10 * v.abs_error),
                                          f"{where} f={spec}")


def renyi_battery(bat: Battery, seed: int, dim: int) -> None:
    rng = _rng(seed, dim, 2)
    rho, sigma = _pair(rng, dim)
    where = f"seed={seed} dim={dim}"
    for alpha in (0.5, 2.0):
        d = d_alpha(rho, sigma, alpha)
        tol = 10 * d.abs_error + 1e-10
        bat["measured_below_d_alpha"].record(d.value - measured_renyi_lower(rho, sigma, alpha),
                                             tol, where)
        bat["d_alpha_below_geometric"].record(geometric_renyi(rho, sigma, alpha) - d.value, tol, where)
        chain = renyi_bound_chain(rho, sigma, alpha, 0.25)
        bat["bound_chain"].record(min(d.value - chain.lower, chain.upper - d.value), tol, where)
        ch = random_channel(dim, dim, 2, seed=rng)
        after = d_alpha(ch(rho), ch(sigma), alpha)
        bat["d_alpha_data_processing"].record(d.value - after.value, tol + 10 * after.abs_error, where)
    for a in (0.5, 1.5, 2.0):
        for b in (0.5, 1.5, 2.0):
            lo, hi = kappa_bound(rho, sigma, a, b)
            h = d_f_integral(hellinger(a), rho, sigma)
            bat["kappa_bracket"].record(min(h.value - lo, hi - h.value),
                                        10 * h.abs_error + 1e-9 * abs(h.value), f"{where} a={a} b={b}")


def contraction_battery(bat: Battery, seed: int, dim: int) -> None:
    rng = _rng(seed, dim, 3)
    where = f"seed={seed} dim={dim}"
    cfg = OptimizerConfig(restarts=4, seed=seed)
    p = float(rng.uniform(0.05, 0.95))
    dep = depolarizing(p, maximally_mixed(dim))
    bat["depolarizing_eta_tr"].record(-abs(eta_tr(dep, cfg).value - (1 - p)), 1e-3, where)
    loc = eta_x2_local(dep, maximally_mixed(dim)).value
    bat["depolarizing_eta_x2_local"].record(-abs(loc - (1 - p) ** 2), 1e-3, where)
    ch = random_channel(dim, dim, 2, seed=rng)
    etr = eta_tr(ch, cfg).value
    sigma = random_density(dim, seed=rng)
    bat["x2_local_below_eta_tr"].record(etr - eta_x2_local(ch, sigma).value, 2e-3, where)
    rho = random_density(dim, seed=rng)
    for f in (kl(), hellinger(0.5)):
        before = d_f_integral(f, rho, sigma)
        after = d_f_integral(f, ch(rho), ch(sigma))
        bat["ratio_below_eta_tr"].record(etr * before.value - after.value,
                                         2e-3 * before.value, f"{where} f={f.name}")


def bounds_battery(bat: Battery, seed: int, dim: int) -> None:
    rng = _rng(seed, dim, 4)
    rho, sigma = _pair(rng, dim)
    tau = random_density(dim, seed=rng)
    where = f"seed={seed} dim={dim}"
    for f in (kl(), js(), hellinger(0.5), hellinger(2.0)):
        for rep in bounds.reverse_pinsker_f(f, rho, sigma):
            bat.bound(rep, where)
        bat.bound(bounds.continuity_first_arg(f, rho, tau, sigma), where)
    kls = bounds.reverse_pinsker_kl(rho, sigma, include_chain=True)
    for rep in kls:
        bat.bound(rep, where)
    for weaker in kls[1:]:
        if math.isfinite(weaker.rhs):
            bat["newrevpin0_tightest"].record(weaker.rhs - kls[0].rhs, 1e-9, where)
    for alpha in (0.5, 2.0):
        for rep in bounds.reverse_pinsker_hellinger(rho, sigma, alpha):
            bat.bound(rep, where)
    for lam in (0.3, 0.5):
        for hat in (False, True):
            bat.bound(bounds.reverse_pinsker_skew(rho, sigma, lam, hat), where)
    bat.bound(bounds.fvdg_improved(rho, sigma), where)
    bat.bound(bounds.pinsker_lower(rho, sigma), where)
    bat.bound(bounds.audenaert_bound(rho, sigma), where)
    bat.bound(bounds.entropy_continuity(rho, sigma), where)
    p, q, a, b = _commuting_pair(rng, 2)
    eq = bounds.reverse_pinsker_kl(a, b)[0]
    bat["newrevpin0_commuting_equality"].record(-eq.slack, 1e-6, where)


def dp_battery(bat: Battery, seed: int, dim: int) -> None:
    rng = _rng(seed, dim, 5)
    where = f"seed={seed} dim={dim}"
    ch = random_channel(dim, dim, 3, seed=rng)
    pair = _pair(rng, dim)
    nb = dpriv.NeighborSet((pair,))
    eps = float(rng.uniform(0.0, 3.0))
    rep = dpriv.check_dp(ch, nb, eps, 0.0)
    bat["dp_criteria_agree"].record(0.0 if rep.criteria_agree else -1.0, 0.0, where)
    grid = np.linspace(0, 2, 5)
    vals = np.array([[dpriv.phi(e, d) for d in np.linspace(0, 1, 5)] for e in grid])
    mono = min(np.diff(vals, axis=0).min(), np.diff(vals, axis=1).min())
    bat["phi_monotone"].record(float(mono), 1e-15, where)
    p = float(rng.uniform(0.05, 0.95))
    dep = depolarizing(p, maximally_mixed(dim))
    eps_dep = math.log((1 - p + p / dim) / (p / dim))
    rho, sigma = _pair(rng, dim)
    rep = dpriv.ldp_divergence_bound(kl(), dep, rho, sigma, eps_dep, 0.0, seed=seed)
    bat.bound(rep, where, factor=1.0)


BATTERIES = {
    "hockey": hockey_battery,
    "fdiv": fdiv_battery,
    "renyi": renyi_battery,
    "contraction": contraction_battery,
    "bounds": bounds_battery,
    "dp": dp_battery,
}


def run(suites, seeds: int, dims) -> Battery:
    """Run the named batteries for seeds ``0..seeds-1`` and each dimension."""
    bat = Battery()
    for name in suites:
        fn = BATTERIES[name]
        for dim in dims:
            for seed in range(seeds):
                fn(bat, seed, dim)
    return bat


__all__ = ["BATTERIES", "Battery", "Property", "SUITES", "run"]
