"""Quantum differential privacy: checks over neighbouring inputs and derived bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundReport, digest
from .fdiv import DEFAULT_REL_TOL, d_f_integral, umegaki
from .functions import ConvexFunction
from .hockey import d_max, e_gamma_unchecked, trace_distance
from .states import QuantumChannel, basis_state, random_density, random_pure, validate_density

#: Slack allowed on both DP criteria for round-off at the boundary.
DP_TOL = 1e-12


class PreconditionError(ValueError):
    """A channel failed the privacy check a bound relies on."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class NeighborSet:
    """Explicit neighbouring pairs; :meth:`closure` adds the swapped orientation."""

    pairs: tuple

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("neighbour set must contain at least one pair")
        checked = tuple((validate_density(a), validate_density(b)) for a, b in self.pairs)
        dims = {m.shape for pair in checked for m in pair}
        if len(dims) != 1:
            raise ValueError(f"neighbouring states have mismatched shapes {sorted(dims)}")
        object.__setattr__(self, "pairs", checked)

    @property
    def dim(self) -> int:
        return self.pairs[0][0].shape[0]

    def closure(self) -> list[tuple[np.ndarray, np.ndarray]]:
        out = []
        for a, b in self.pairs:
            out.append((a, b))
            out.append((b, a))
        return out


@dataclass(frozen=True)
class DPReport:
    eps: float
    delta: float
    passed: bool
    worst_e: float
    worst_pair: int
    dmax_passed: bool | None = None
    worst_dmax: float | None = None
    criteria_agree: bool | None = None
    extra: dict = field(default_factory=dict, repr=False)

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "delta": self.delta,
            "passed": self.passed,
            "worst_e": self.worst_e,
            "worst_pair": self.worst_pair,
            "dmax_passed": self.dmax_passed,
            "worst_dmax": self.worst_dmax,
            "criteria_agree": self.criteria_agree,
        }


def _check_params(eps: float, delta: float) -> None:
    if not eps >= 0 or math.isnan(eps):
        raise ValueError(f"eps must be non-negative, got {eps}")
    if not 0 <= delta <= 1:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")


def check_dp(channel: QuantumChannel, neighbors: NeighborSet, eps: float, delta: float) -> DPReport:
    """Check ``sup E_{e^eps}(A(rho)||A(sigma)) <= delta`` over both orientations of every pair.

    ``worst_pair`` indexes the symmetric closure: ``2k`` is pair ``k`` as given,
    ``2k + 1`` the swapped one. With ``delta = 0`` the equivalent ``D_max``
    criterion is evaluated as well.
    """
    _check_params(eps, delta)
    if neighbors.dim != channel.dim_in:
        raise ValueError(
            f"neighbour dimension {neighbors.dim} does not match channel input {channel.dim_in}"
        )
    gamma = math.exp(eps)
    outs = [(channel(a), channel(b)) for a, b in neighbors.closure()]
    es = [float(e_gamma_unchecked(x, y, [gamma])[0]) if math.isfinite(gamma) else 0.0
          for x, y in outs]
    worst = int(np.argmax(es))
    passed = es[worst] <= delta + DP_TOL
    if delta > 0:
        return DPReport(eps, delta, passed, es[worst], worst)
    dms = [d_max(x, y) for x, y in outs]
    dm_passed = max(dms) <= eps + DP_TOL
    return DPReport(eps, delta, passed, es[worst], worst,
                    dm_passed, max(dms), dm_passed == passed)


def phi(eps: float, delta: float) -> float:
    """Trace-contraction bound ``1 - e^{-eps} (1 - delta)`` for ``(eps, delta)``-LDP channels."""
    _check_params(eps, delta)
    return 1.0 - math.exp(-eps) * (1.0 - delta)


def pure_sample_neighbors(dim: int, n_samples: int = 32, seed: int = 0) -> NeighborSet:
    """All pairs from the computational basis plus ``n_samples`` seeded random pure states."""
    rng = np.random.default_rng(seed)
    states = [basis_state(dim, k) for k in range(dim)]
    states += [random_pure(dim, seed=rng) for _ in range(n_samples)]
    pairs = tuple((a, b) for i, a in enumerate(states) for b in states[i + 1:])
    return NeighborSet(pairs)


def ldp_divergence_bound(f: ConvexFunction, channel: QuantumChannel, rho, sigma,
                         eps: float, delta: float, rel_tol: float = DEFAULT_REL_TOL,
                         samples: NeighborSet | None = None, seed: int = 0) -> BoundReport:
    """``D_f(A(rho)||A(sigma)) <= phi(eps, delta) D_f(rho||sigma)`` for an LDP channel.

    The LDP property is checked on ``samples`` (pure-state pairs by default).
    A failed check is conclusive; a passed one is only as good as the sample.
    """
    rho, sigma = validate_density(rho), validate_density(sigma)
    samples = samples or pure_sample_neighbors(channel.dim_in, seed=seed)
    report = check_dp(channel, samples, eps, delta)
    if not report.passed:
        a, b = samples.closure()[report.worst_pair]
        raise PreconditionError(
            f"channel is not ({eps}, {delta})-LDP: E_(e^eps) reaches {report.worst_e:.6g}",
            witness=(a, b),
        )
    lhs = d_f_integral(f, channel(rho), channel(sigma), rel_tol)
    inp = d_f_integral(f, rho, sigma, rel_tol)
    factor = phi(eps, delta)
    rhs = 0.0 if factor == 0 else factor * inp.value
    return BoundReport(lhs.value, rhs, f"ldp_{f.name}",
                       digest(rho, sigma, *channel.kraus, eps=eps, delta=delta),
                       lhs.abs_error + factor * inp.abs_error)


def stein_converse_rate(rho, sigma, eps: float, delta: float) -> float:
    """Upper bound ``phi(eps, delta) D(rho||sigma)`` on the Stein exponent after an LDP channel."""
    return phi(eps, delta) * umegaki(validate_density(rho), validate_density(sigma))


def dp_shortcut_bounds(channel: QuantumChannel, neighbors: NeighborSet, eps: float,
                       taus=None, seed: int = 0) -> list[BoundReport]:
    """Relative-entropy bounds for an ``eps``-DP channel on each neighbouring pair.

    Emits ``D(A(rho)||A(sigma)) <= eps E_1`` and, for each ``tau``,
    ``D(A(rho)||A(sigma)) - D(tau||A(sigma)) <= 2 eps E_1(A(rho)||tau)``.
    Without ``taus`` one seeded random output state is drawn per pair.
    """
    report = check_dp(channel, neighbors, eps, 0.0)
    if not report.passed:
        a, b = neighbors.closure()[report.worst_pair]
        raise PreconditionError(f"channel is not {eps}-DP on the neighbour set", witness=(a, b))
    rng = np.random.default_rng(seed)
    out = []
    for a, b in neighbors.closure():
        x, y = channel(a), channel(b)
        tag = digest(a, b, *channel.kraus, eps=eps)
        d = umegaki(x, y)
        out.append(BoundReport(d, eps * trace_distance(x, y), "dp_pinsker", tag, 1e-12))
        pool = taus if taus is not None else [random_density(channel.dim_out, seed=rng)]
        for tau in pool:
            tau = validate_density(tau)
            lhs = d - umegaki(tau, y)
            out.append(BoundReport(lhs, 2 * eps * trace_distance(x, tau), "dp_continuity",
                                   digest(a, b, tau, *channel.kraus, eps=eps), 1e-12))
    return out


__all__ = [
    "DPReport",
    "NeighborSet",
    "PreconditionError",
    "check_dp",
    "dp_shortcut_bounds",
    "ldp_divergence_bound",
    "phi",
    "pure_sample_neighbors",
    "stein_converse_rate",
]
