"""Hellinger/Renyi divergences from hockey-stick integrals and closed-form comparators.

All closed-form Renyi variants accept ``alpha = 1`` and return their limits
there: Umegaki for Petz and sandwiched, Belavkin-Staszewski for geometric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fdiv import DEFAULT_REL_TOL, DivergenceValue, d_f_integral, umegaki
from .functions import hellinger, kl
from .hockey import d_max, orthogonal, support_contained, support_flag
from .linalg import eigh, eigvalsh, matrix_log, matrix_power, matrix_sqrt, pseudo_inverse_sqrt
from .states import haar_unitary, tensor_power, validate_density


class DomainError(ValueError):
    """Order outside the validity range of the requested quantity."""


def _check_alpha(alpha: float, lo: float, lo_open: bool, hi: float) -> None:
    ok = (alpha > lo if lo_open else alpha >= lo) and alpha <= hi
    if not ok or not math.isfinite(alpha):
        raise DomainError(f"alpha={alpha} outside the validity range")


def _log_q_to_renyi(q: float, alpha: float) -> float:
    if q <= 0:
        return math.inf if alpha < 1 else -math.inf
    return math.log(q) / (alpha - 1)


def h_alpha(rho, sigma, alpha: float, rel_tol: float = DEFAULT_REL_TOL) -> DivergenceValue:
    """Hellinger divergence of order ``alpha`` (KL at ``alpha = 1``)."""
    if alpha <= 0:
        raise DomainError(f"alpha={alpha} must be positive")
    f = kl() if alpha == 1 else hellinger(alpha)
    return d_f_integral(f, rho, sigma, rel_tol)


def d_alpha(rho, sigma, alpha: float, rel_tol: float = DEFAULT_REL_TOL) -> DivergenceValue:
    """``log(1 + (alpha-1) H_alpha)/(alpha-1)``; Umegaki at ``alpha = 1``."""
    rho, sigma = validate_density(rho), validate_density(sigma)
    flag = support_flag(rho, sigma)
    if alpha < 1 and orthogonal(rho, sigma):
        return DivergenceValue(math.inf, 0.0, flag)
    h = h_alpha(rho, sigma, alpha, rel_tol)
    if alpha == 1 or not h.finite:
        return h
    arg = 1.0 + (alpha - 1.0) * h.value
    if arg <= 0:
        return DivergenceValue(math.inf, 0.0, flag)
    return DivergenceValue(math.log1p((alpha - 1.0) * h.value) / (alpha - 1.0), h.abs_error / arg, flag)


def petz_q(rho, sigma, alpha: float) -> float:
    """``Tr rho^alpha sigma^(1-alpha)`` on supports; ``inf`` for ``alpha > 1`` without ``rho << sigma``."""
    if alpha > 1 and not support_contained(rho, sigma):
        return math.inf
    return float(np.trace(matrix_power(rho, alpha) @ matrix_power(sigma, 1 - alpha)).real)


def sandwiched_q(rho, sigma, alpha: float) -> float:
    if alpha > 1 and not support_contained(rho, sigma):
        return math.inf
    s = matrix_power(sigma, (1 - alpha) / (2 * alpha))
    w = eigvalsh(s @ rho @ s)
    return float(np.sum(np.clip(w, 0, None) ** alpha))


def geometric_q(rho, sigma, alpha: float) -> float:
    """``Tr sigma^1/2 (sigma^-1/2 rho sigma^-1/2)^alpha sigma^1/2``, evaluated on ``supp(sigma)``."""
    if alpha > 1 and not support_contained(rho, sigma):
        return math.inf
    inv = pseudo_inverse_sqrt(sigma)
    half = matrix_sqrt(sigma)
    mid = matrix_power(inv @ rho @ inv, alpha)
    return float(np.trace(half @ mid @ half).real)


# Below this |alpha - 1| the roundoff in log Q / (alpha - 1) exceeds the
# first-order distance to the alpha = 1 limit, so the limit is returned.
ALPHA_ONE_TOL = 1e-8


def _closed_form(rho, sigma, alpha, qfn, at_one) -> float:
    rho, sigma = validate_density(rho), validate_density(sigma)
    if abs(alpha - 1) <= ALPHA_ONE_TOL:
        return at_one(rho, sigma)
    if alpha < 1 and orthogonal(rho, sigma):
        return math.inf
    q = qfn(rho, sigma, alpha)
    return math.inf if math.isinf(q) else _log_q_to_renyi(q, alpha)


def petz_renyi(rho, sigma, alpha: float) -> float:
    _check_alpha(alpha, 0, True, 2)
    return _closed_form(rho, sigma, alpha, petz_q, umegaki)


def sandwiched_renyi(rho, sigma, alpha: float) -> float:
    _check_alpha(alpha, 0.5, False, math.inf)
    return _closed_form(rho, sigma, alpha, sandwiched_q, umegaki)


def belavkin_staszewski(rho, sigma) -> float:
    """``Tr rho log(rho^1/2 sigma^-1 rho^1/2)``, the geometric limit at ``alpha = 1``."""
    rho, sigma = validate_density(rho), validate_density(sigma)
    if not support_contained(rho, sigma):
        return math.inf
    r = matrix_sqrt(rho)
    inv = matrix_power(sigma, -1.0)
    return float(np.trace(rho @ matrix_log(r @ inv @ r)).real)


def geometric_renyi(rho, sigma, alpha: float) -> float:
    _check_alpha(alpha, 0, True, 2)
    return _closed_form(rho, sigma, alpha, geometric_q, belavkin_staszewski)


def classical_renyi(p, q, alpha: float) -> float:
    """Classical Renyi divergence of order ``alpha`` (KL at 1)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if abs(alpha - 1) <= ALPHA_ONE_TOL:
        if np.any((p > 0) & (q <= 0)):
            return math.inf
        m = p > 0
        return float(np.sum(p[m] * np.log(p[m] / q[m])))
    if alpha > 1 and np.any((p > 0) & (q <= 0)):
        return math.inf
    m = (p > 0) & (q > 0)
    return _log_q_to_renyi(float(np.sum(p[m] ** alpha * q[m] ** (1 - alpha))), alpha)


def nussbaum_szkola(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
    """Classical pair ``P(x,y) = r_x |<v_x|u_y>|^2`` and ``Q(x,y) = s_y |<v_x|u_y>|^2``.

    ``r, v`` and ``s, u`` are the eigen-decompositions of ``rho`` and ``sigma``;
    the pair reproduces ``Tr rho^a sigma^(1-a)`` as ``sum P^a Q^(1-a)``.
    """
    rho, sigma = validate_density(rho), validate_density(sigma)
    r, v = eigh(rho)
    s, u = eigh(sigma)
    r, s = np.clip(r, 0, None), np.clip(s, 0, None)
    overlap = np.abs(v.conj().T @ u) ** 2
    return (r[:, None] * overlap).ravel(), (s[None, :] * overlap).ravel()


def _basis_outcomes(state, basis):
    return np.clip(np.einsum("ik,ij,jk->k", basis.conj(), state, basis).real, 0, None)


def _basis_renyi(rho, sigma, basis, alpha):
    return classical_renyi(_basis_outcomes(rho, basis), _basis_outcomes(sigma, basis), alpha)


STRATEGIES = ("sigma_eigenbasis", "rho_eigenbasis", "ns_pair", "geometric_mean_basis",
              "random_projective", "best")


def measured_renyi_lower(rho, sigma, alpha: float, strategy: str = "best",
                         k: int = 16, seed: int = 0) -> float:
    """Classical Renyi divergence after an explicit projective measurement.

    Every strategy is a genuine measurement, so the result never exceeds the
    measured Renyi divergence. ``ns_pair`` takes the better of the two
    eigenbases, ``geometric_mean_basis`` measures in the eigenbasis of
    ``sigma^-1 # rho`` (optimal at order 1/2), ``random_projective`` the best of
    ``k`` Haar-random bases, and ``best`` the maximum over all of these.
    """
    rho, sigma = validate_density(rho), validate_density(sigma)
    if strategy == "sigma_eigenbasis":
        return _basis_renyi(rho, sigma, eigh(sigma).eigenvectors, alpha)
    if strategy == "rho_eigenbasis":
        return _basis_renyi(rho, sigma, eigh(rho).eigenvectors, alpha)
    if strategy == "ns_pair":
        return max(measured_renyi_lower(rho, sigma, alpha, s) for s in ("sigma_eigenbasis", "rho_eigenbasis"))
    if strategy == "geometric_mean_basis":
        inv = pseudo_inverse_sqrt(sigma)
        half = matrix_sqrt(sigma)
        op = inv @ matrix_sqrt(half @ rho @ half) @ inv
        return _basis_renyi(rho, sigma, eigh((op + op.conj().T) / 2).eigenvectors, alpha)
    if strategy == "random_projective":
        d = rho.shape[0]
        return max(_basis_renyi(rho, sigma, haar_unitary(d, seed=(seed, i)), alpha) for i in range(k))
    if strategy == "best":
        return max(measured_renyi_lower(rho, sigma, alpha, s, k, seed) for s in STRATEGIES[:-1])
    raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")


@dataclass(frozen=True)
class BoundChain:
    """Single-copy bracket ``lower <= D_alpha <= upper`` from the limit proof.

    For ``alpha > 1`` the upper end is the explicit sandwiched bound at offset
    ``epsilon`` and the lower end the best measured value. For ``alpha < 1``
    the lower end is the explicit Petz bound and the upper end Petz plus
    ``ln 2/(1-alpha)``.
    """

    alpha: float
    epsilon: float
    lower: float
    upper: float


def _explicit_bound(log_q_plus: float, log_q_minus: float, alpha: float, epsilon: float, copies: int = 1) -> float:
    # (1/(a-1)) log(c/eps * (Q+^n + Q-^n)) / n with c = |a(a-1)|, in log space.
    c = abs(alpha * (alpha - 1))
    lse = np.logaddexp(copies * log_q_plus, copies * log_q_minus)
    return (math.log(c / epsilon) + float(lse)) / (alpha - 1) / copies


def renyi_bound_chain(rho, sigma, alpha: float, epsilon: float) -> BoundChain:
    rho, sigma = validate_density(rho), validate_density(sigma)
    if alpha > 1:
        if not 0 < epsilon < alpha - 1:
            raise DomainError(f"epsilon must lie in (0, {alpha - 1}) for alpha={alpha}")
        if not support_contained(rho, sigma):
            return BoundChain(alpha, epsilon, math.inf, math.inf)
        qp = sandwiched_q(rho, sigma, alpha + epsilon)
        qm = sandwiched_q(rho, sigma, alpha - epsilon)
        upper = _explicit_bound(math.log(qp), math.log(qm), alpha, epsilon)
        return BoundChain(alpha, epsilon, measured_renyi_lower(rho, sigma, alpha), upper)
    if alpha < 1:
        if not 0 < epsilon < min(alpha, 1 - alpha):
            raise DomainError(f"epsilon must lie in (0, {min(alpha, 1 - alpha)}) for alpha={alpha}")
        if orthogonal(rho, sigma):
            return BoundChain(alpha, epsilon, math.inf, math.inf)
        qp = petz_q(rho, sigma, alpha + epsilon)
        qm = petz_q(rho, sigma, alpha - epsilon)
        lower = _explicit_bound(math.log(qp), math.log(qm), alpha, epsilon)
        upper = petz_renyi(rho, sigma, alpha) + math.log(2) / (1 - alpha)
        return BoundChain(alpha, epsilon, lower, upper)
    raise DomainError("alpha must differ from 1")


@dataclass(frozen=True)
class RegularizationTrace:
    alpha: float
    n_values: list[int]
    per_n: list[tuple[float, float]]
    petz_ref: float
    sandwiched_ref: float
    lower: list[float] = field(default_factory=list)
    upper: list[float] = field(default_factory=list)

    def violations(self, slack: float = 1e-9) -> list[int]:
        """Copy numbers whose value leaves ``[lower, upper]`` by more than the error budget."""
        bad = []
        for n, (v, e), lo, hi in zip(self.n_values, self.per_n, self.lower, self.upper):
            tol = 10 * e + slack
            if v < lo - tol or v > hi + tol:
                bad.append(n)
        return bad


def regularization_trace(rho, sigma, alpha: float, n_max: int = 4,
                         rel_tol: float = DEFAULT_REL_TOL) -> RegularizationTrace:
    """Per-copy values ``D_alpha(rho^n||sigma^n)/n`` with the proof's finite-n bracket.

    For ``alpha < 1`` the bracket is ``[explicit Petz bound, Petz + ln2/((1-alpha) n)]``;
    for ``alpha > 1`` it is ``[sigma-eigenbasis measured value, explicit sandwiched bound]``.
    Both reference quantities are additive, so their n-copy values come from
    single-copy ones.
    """
    if alpha == 1 or alpha <= 0:
        raise DomainError("alpha must be positive and differ from 1")
    rho, sigma = validate_density(rho), validate_density(sigma)
    if rho.shape[0] ** n_max > 4096:
        raise MemoryError(f"dimension {rho.shape[0]}**{n_max} exceeds the guard 4096")
    petz = petz_renyi(rho, sigma, min(alpha, 2.0)) if alpha <= 2 else math.nan
    sand = sandwiched_renyi(rho, sigma, alpha) if alpha >= 0.5 else math.nan
    ns = list(range(1, n_max + 1))
    per_n, lower, upper = [], [], []
    if alpha > 1:
        eps = (alpha - 1) / 2
        meas = measured_renyi_lower(rho, sigma, alpha, "sigma_eigenbasis")
        lqp = math.log(sandwiched_q(rho, sigma, alpha + eps))
        lqm = math.log(sandwiched_q(rho, sigma, alpha - eps))
    else:
        eps = min(alpha, 1 - alpha) / 2
        lqp = math.log(petz_q(rho, sigma, alpha + eps))
        lqm = math.log(petz_q(rho, sigma, alpha - eps))
    for n in ns:
        d = d_alpha(tensor_power(rho, n), tensor_power(sigma, n), alpha, rel_tol)
        per_n.append((d.value / n, d.abs_error / n))
        explicit = _explicit_bound(lqp, lqm, alpha, eps, n)
        if alpha > 1:
            lower.append(meas)
            upper.append(explicit)
        else:
            lower.append(explicit)
            upper.append(petz + math.log(2) / ((1 - alpha) * n))
    return RegularizationTrace(alpha, ns, per_n, petz, sand, lower, upper)


def _kappa(alpha: float, beta: float, dmax_rs: float, dmax_sr: float) -> float:
    if alpha >= beta:
        return math.exp((beta - alpha) * dmax_sr)
    return math.exp((alpha - beta) * dmax_rs)


def kappa_bound(rho, sigma, alpha: float, beta: float,
                rel_tol: float = DEFAULT_REL_TOL) -> tuple[float, float]:
    """Bracket for ``H_alpha`` from ``H_beta``.

    ``(alpha/beta) k(alpha,beta) H_beta <= H_alpha <= (alpha/beta) H_beta / k(beta,alpha)``
    where ``k(a,b) = exp((b-a) D_max(sigma||rho))`` for ``a >= b`` and
    ``exp((a-b) D_max(rho||sigma))`` otherwise. The factor ``alpha/beta`` comes
    from the ``alpha`` prefactor of the integral form of ``H_alpha``.
    """
    rho, sigma = validate_density(rho), validate_density(sigma)
    if not (support_contained(rho, sigma) and support_contained(sigma, rho)):
        raise ValueError("kappa bracket needs rho and sigma with equal supports")
    if alpha <= 0 or beta <= 0:
        raise DomainError("orders must be positive")
    h_beta = h_alpha(rho, sigma, beta, rel_tol).value
    drs, dsr = d_max(rho, sigma), d_max(sigma, rho)
    scale = alpha / beta
    lower = scale * _kappa(alpha, beta, drs, dsr) * h_beta
    upper = scale * h_beta / _kappa(beta, alpha, drs, dsr)
    return lower, upper
