"""Integral f-divergences built from hockey-stick divergences.

The main evaluator integrates ``f''(g) E_g(rho||sigma)`` plus the mirrored
term ``g^-3 f''(1/g) E_g(sigma||rho)`` over ``g >= 1``. Every integrand is
analytic between the roots of ``det(A - g B)``, so panels are split at those
roots and at the support endpoint ``g = exp(D_max)``, beyond which the
integrand vanishes. When ``D_max`` is infinite the range is truncated and the
remainder is bracketed analytically using the registry's boundary limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .functions import ConvexFunction, kl
from .hockey import (
    PSDError,
    kernel_weight,
    max_ratio,
    pencil_breakpoints,
    support_contained,
    support_flag,
)
from .linalg import (
    eigh,
    eigvalsh,
    hermitian,
    inverse_log_mean,
    matrix_log,
    pseudo_inverse_sqrt,
    support_mask,
)
from .quadrature import QuadratureError, integrate
from .states import validate_density

DEFAULT_REL_TOL = 1e-8
ABS_TOL = 1e-15
# Tail truncation grows by this factor until the tail bracket is tight enough.
_TAIL_STEP = 1e4
_TAIL_MAX = 1e300


@dataclass(frozen=True)
class DivergenceValue:
    value: float
    abs_error: float
    support_flag: str

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self) -> float:
        return float(self.value)


def _check_tol(rel_tol: float) -> None:
    if not 1e-12 <= rel_tol <= 1e-2:
        raise ValueError(f"rel_tol must lie in [1e-12, 1e-2], got {rel_tol}")


def _pos_trace(a: np.ndarray, b: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """``g -> Tr(a - g b)_+`` evaluated on arrays of ``g``."""

    def ev(g: np.ndarray) -> np.ndarray:
        w = eigvalsh(a[None, :, :] - np.asarray(g)[:, None, None] * b[None, :, :])
        return np.where(w > 0, w, 0.0).sum(axis=1)

    return ev


def _scalar(fn, x: float) -> float:
    return float(fn(np.array([x], dtype=float))[0])


def _integrate_log(integrand, lo: float, hi: float, kinks, rel_tol: float):
    """Integrate ``integrand(g) dg`` over ``[lo, hi]`` in the variable ``t = ln g``."""
    if hi <= lo:
        return 0.0, 0.0
    pts = [math.log(lo), *(math.log(k) for k in kinks), math.log(hi)]

    def h(t):
        g = np.exp(t)
        return integrand(g) * g

    res = integrate(h, pts, rel_tol=rel_tol, abs_tol=ABS_TOL)
    return res.value, res.error


def _hockey_branch(
    a: np.ndarray,
    b: np.ndarray,
    weight: Callable[[np.ndarray], np.ndarray],
    tail: Callable[[float], float],
    tail_divergent: bool,
    rel_tol: float,
) -> tuple[float, float]:
    """``int_1^inf weight(g) Tr(a - g b)_+ dg`` for PSD ``a``, ``b``.

    ``tail(G)`` must return ``int_G^inf weight``; ``tail_divergent`` says
    whether that integral is infinite.
    """
    ev = _pos_trace(a, b)

    def integrand(g):
        return weight(g) * ev(g)

    top = max_ratio(a, b)
    if math.isfinite(top):
        if top <= 1.0:
            return 0.0, 0.0
        kinks = pencil_breakpoints(a, b, 1.0, top)
        return _integrate_log(integrand, 1.0, top, kinks, rel_tol)

    e_inf = kernel_weight(a, b)
    if tail_divergent:
        return math.inf, 0.0
    kinks = pencil_breakpoints(a, b, 1.0, math.inf)
    cut = 1e3 * max([1.0, *kinks])
    value, error = _integrate_log(integrand, 1.0, cut, kinks, rel_tol)
    while True:
        t = tail(cut)
        e_cut = _scalar(ev, cut)
        lo_tail, hi_tail = e_inf * t, e_cut * t
        tail_err = 0.5 * (hi_tail - lo_tail)
        if tail_err <= 0.1 * max(rel_tol * abs(value), ABS_TOL) or cut * _TAIL_STEP > _TAIL_MAX:
            return value + 0.5 * (lo_tail + hi_tail), error + tail_err
        nxt = cut * _TAIL_STEP
        v, e = _integrate_log(integrand, cut, nxt, [], rel_tol)
        value, error, cut = value + v, error + e, nxt


def _weights(f: ConvexFunction):
    """Weights, tails and divergence flags for the direct and mirrored branches."""

    def w_mirror(g):
        return f.fpp(1.0 / g) / g**3

    def tail_direct(cut: float) -> float:
        return f.fp_inf - _scalar(f.fp, cut)

    def tail_mirror(cut: float) -> float:
        x = 1.0 / cut
        return f.f0 - (_scalar(f.f, x) - x * _scalar(f.fp, x))

    return (
        (f.fpp, tail_direct, math.isinf(f.fp_inf)),
        (w_mirror, tail_mirror, math.isinf(f.f0)),
    )


def _hockey_integral(f: ConvexFunction, a: np.ndarray, b: np.ndarray, rel_tol: float):
    (w1, t1, d1), (w2, t2, d2) = _weights(f)
    v1, e1 = _hockey_branch(a, b, w1, t1, d1, rel_tol)
    if math.isinf(v1):
        return math.inf, 0.0
    v2, e2 = _hockey_branch(b, a, w2, t2, d2, rel_tol)
    if math.isinf(v2):
        return math.inf, 0.0
    return v1 + v2, e1 + e2


def d_f_integral(f: ConvexFunction, rho, sigma, rel_tol: float = DEFAULT_REL_TOL) -> DivergenceValue:
    """Quantum f-divergence from the two-sided hockey-stick integral.

    Returns ``+inf`` exactly when the analytic tail diverges (for instance KL
    with ``supp(rho)`` not inside ``supp(sigma)``).
    """
    _check_tol(rel_tol)
    rho, sigma = validate_density(rho), validate_density(sigma)
    value, err = _hockey_integral(f, rho, sigma, rel_tol)
    return DivergenceValue(value, err, support_flag(rho, sigma))


def d_f_generalized(f: ConvexFunction, a, b, rel_tol: float = DEFAULT_REL_TOL) -> DivergenceValue:
    """f-divergence for unnormalized positive operators.

    ``Tr(A - B)`` plus the hockey-stick integrals with the positive-part trace
    ``Tr(A - g B)_+`` in place of ``E_g``; reduces to :func:`d_f_integral` on states.
    """
    _check_tol(rel_tol)
    a, b = hermitian(a), hermitian(b)
    for name, m in (("A", a), ("B", b)):
        w = eigvalsh(m)
        if w[0] < -1e-10 * max(1.0, w[-1]):
            raise PSDError(f"{name} has negative eigenvalue {w[0]:.6g}")
        if np.trace(m).real <= 0:
            raise ValueError(f"{name} has zero trace")
    value, err = _hockey_integral(f, a, b, rel_tol)
    return DivergenceValue(float(np.trace(a - b).real) + value, err, support_flag(a, b))


def d_f_single_integral(f: ConvexFunction, rho, sigma, rel_tol: float = DEFAULT_REL_TOL) -> DivergenceValue:
    """Cross-check evaluator ``int_0^inf f''(g) E_g(rho||sigma) dg``.

    Uses only the ``rho - g sigma`` direction, with ``(1 - g)_+`` subtracted on
    ``g < 1``; the piece above 1 is integrated in the linear variable.
    """
    _check_tol(rel_tol)
    rho, sigma = validate_density(rho), validate_density(sigma)
    ev = _pos_trace(rho, sigma)

    def e_full(g):
        return np.maximum(ev(g) - np.maximum(1.0 - g, 0.0), 0.0)

    def integrand(g):
        return f.fpp(g) * e_full(g)

    (_, tail_up, div_up), _ = _weights(f)
    total, err = 0.0, 0.0

    # Upper piece, g >= 1.
    top = max_ratio(rho, sigma)
    if math.isfinite(top):
        if top > 1.0:
            kinks = pencil_breakpoints(rho, sigma, 1.0, top)
            res = integrate(integrand, [1.0, *kinks, top], rel_tol=rel_tol, abs_tol=ABS_TOL)
            total, err = res.value, res.error
    else:
        v, e = _hockey_branch(rho, sigma, f.fpp, tail_up, div_up, rel_tol)
        if math.isinf(v):
            return DivergenceValue(math.inf, 0.0, support_flag(rho, sigma))
        total, err = v, e

    # Lower piece, 0 < g < 1: E_g(rho||sigma) vanishes below 1/D where D bounds sigma/rho.
    bottom_ratio = max_ratio(sigma, rho)
    if math.isfinite(bottom_ratio):
        lo = 1.0 / bottom_ratio
        if lo < 1.0:
            kinks = pencil_breakpoints(rho, sigma, lo, 1.0)
            v, e = _integrate_log(integrand, lo, 1.0, kinks, rel_tol)
            total, err = total + v, err + e
    else:
        if math.isinf(f.f0):
            return DivergenceValue(math.inf, 0.0, support_flag(rho, sigma))
        slope_inf = kernel_weight(sigma, rho)
        kinks = pencil_breakpoints(rho, sigma, 0.0, 1.0)
        cut = 1e-3 * min([1.0, *kinks])
        v, e = _integrate_log(integrand, cut, 1.0, kinks, rel_tol)
        while True:
            # On (0, cut]: g * slope_inf <= E_g <= g * E_cut / cut, and
            # int_0^cut g f''(g) dg = f0 - (f(cut) - cut f'(cut)).
            t = f.f0 - (_scalar(f.f, cut) - cut * _scalar(f.fp, cut))
            lo_tail = slope_inf * t
            hi_tail = _scalar(e_full, cut) / cut * t
            tail_err = 0.5 * abs(hi_tail - lo_tail)
            if tail_err <= 0.1 * max(rel_tol * abs(total + v), ABS_TOL) or cut / _TAIL_STEP < 1 / _TAIL_MAX:
                total += v + 0.5 * (lo_tail + hi_tail)
                err += e + tail_err
                break
            nxt = cut / _TAIL_STEP
            v2, e2 = _integrate_log(integrand, nxt, cut, [], rel_tol)
            v, e, cut = v + v2, e + e2, nxt
    return DivergenceValue(total, err, support_flag(rho, sigma))


def d_f_degroot(f: ConvexFunction, rho, sigma, rel_tol: float = DEFAULT_REL_TOL) -> DivergenceValue:
    """Cross-check evaluator through statistical information.

    ``int_0^1 p^-3 f''((1-p)/p) I_p dp`` rewritten with ``u = (1-p)/p`` as
    ``int_0^inf (1+u) f''(u) I_{1/(1+u)} du``.
    """
    _check_tol(rel_tol)
    rho, sigma = validate_density(rho), validate_density(sigma)
    ev_rs = _pos_trace(rho, sigma)
    ev_sr = _pos_trace(sigma, rho)

    def info(p: np.ndarray) -> np.ndarray:
        # Statistical information I_p, vectorized over the prior p.
        out = np.empty_like(p)
        low = p <= 0.5
        pl, ph = p[low], p[~low]
        if pl.size:
            out[low] = pl * ev_rs((1 - pl) / pl)
        if ph.size:
            out[~low] = (1 - ph) * ev_sr(ph / (1 - ph))
        return out

    def integrand(u):
        return (1 + u) * f.fpp(u) * info(1.0 / (1.0 + u))

    flag = support_flag(rho, sigma)
    (_, tail_up, div_up), (_, tail_dn, div_dn) = _weights(f)
    top = max_ratio(rho, sigma)
    bottom_ratio = max_ratio(sigma, rho)
    if (math.isinf(top) and div_up) or (math.isinf(bottom_ratio) and div_dn):
        return DivergenceValue(math.inf, 0.0, flag)

    total, err = 0.0, 0.0
    if math.isfinite(top) and top > 1.0:
        v, e = _integrate_log(integrand, 1.0, top, pencil_breakpoints(rho, sigma, 1.0, top), rel_tol)
        total, err = v, e
    elif math.isinf(top):
        # The u >= 1 half is the direct hockey-stick branch; reuse its tail handling.
        v, e = _hockey_branch(rho, sigma, f.fpp, tail_up, False, rel_tol)
        total, err = v, e
    if math.isfinite(bottom_ratio):
        lo = 1.0 / bottom_ratio
        if lo < 1.0:
            v, e = _integrate_log(integrand, lo, 1.0, pencil_breakpoints(rho, sigma, lo, 1.0), rel_tol)
            total, err = total + v, err + e
    else:
        # u -> 1/u maps the lower half onto the mirrored branch.
        (_, _, _), (w_dn, _, _) = _weights(f)
        v, e = _hockey_branch(sigma, rho, w_dn, tail_dn, False, rel_tol)
        total, err = total + v, err + e
    return DivergenceValue(total, err, flag)


def _entropy_terms(w: np.ndarray) -> float:
    pos = w[w > 0]
    return float(np.sum(pos * np.log(pos)))


def umegaki(rho, sigma) -> float:
    """``Tr rho (log rho - log sigma)``; ``+inf`` unless ``supp(rho)`` lies in ``supp(sigma)``."""
    rho, sigma = validate_density(rho), validate_density(sigma)
    if not support_contained(rho, sigma):
        return math.inf
    w = eigvalsh(rho)
    return _entropy_terms(w) - float(np.trace(rho @ matrix_log(sigma)).real)


def von_neumann_entropy(rho) -> float:
    return -_entropy_terms(eigvalsh(hermitian(rho)))


def chi2_closed(rho, sigma) -> float:
    """Closed-form chi-square divergence (the order-2 Hellinger value).

    In the eigenbasis of sigma with eigenvalues ``l_i`` the divergence is
    ``sum_ij |(rho - sigma)_ij|^2 c_ij`` with ``c_ij = (ln l_i - ln l_j)/(l_i - l_j)``,
    which equals ``sum_ij |rho_ij|^2 c_ij - 1`` without the cancellation.
    """
    rho, sigma = validate_density(rho), validate_density(sigma)
    if not support_contained(rho, sigma):
        return math.inf
    w, v = eigh(sigma)
    mask = support_mask(w)
    lam = w[mask]
    vs = v[:, mask]
    delta = vs.conj().T @ (rho - sigma) @ vs
    c = inverse_log_mean(lam[:, None], lam[None, :])
    return float(np.sum(np.abs(delta) ** 2 * c))


def _neville_at_zero(xs, ys) -> float:
    p = list(ys)
    n = len(xs)
    for k in range(1, n):
        for i in range(n - k):
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i])
    return p[0]


def local_chi2_limit(f: ConvexFunction, rho, sigma, lambdas=None) -> float:
    """Richardson-extrapolated limit of ``(2/l^2) D_f(l rho + (1-l) sigma || sigma)`` as ``l -> 0``.

    By the local expansion this limit equals ``f''(1) * chi2(rho||sigma)``.
    The default grid halves four times from ``min(0.1, 0.2/r)``, where ``r`` is
    the spectral radius of ``sigma^-1/2 (rho - sigma) sigma^-1/2``; the expansion
    in ``l`` only converges for ``l < 1/r``.
    """
    rho, sigma = validate_density(rho), validate_density(sigma)
    if not (support_contained(rho, sigma) and support_contained(sigma, rho)):
        raise ValueError("local limit needs rho and sigma with equal supports")
    if lambdas is None:
        m = pseudo_inverse_sqrt(sigma)
        r = float(np.abs(eigvalsh(hermitian(m @ (rho - sigma) @ m))).max())
        start = min(0.1, 0.2 / r) if r > 0 else 0.1
        lambdas = [start / 2**k for k in range(4)]
    ys = []
    for lam in lambdas:
        mix = lam * rho + (1 - lam) * sigma
        ys.append(2.0 / lam**2 * d_f_integral(f, mix, sigma, rel_tol=1e-12).value)
    return _neville_at_zero(list(lambdas), ys)


def skew_divergence(f: ConvexFunction, lam: float, mu: float, rho, sigma,
                    rel_tol: float = DEFAULT_REL_TOL) -> DivergenceValue:
    """``(1-mu) D_f(rho||m) + mu D_f(sigma||m)`` with ``m = lam rho + (1-lam) sigma``."""
    rho, sigma = validate_density(rho), validate_density(sigma)
    mix = lam * rho + (1 - lam) * sigma
    value, err = 0.0, 0.0
    for weight, state in ((1 - mu, rho), (mu, sigma)):
        if weight == 0:
            continue
        d = d_f_integral(f, state, mix, rel_tol)
        value += weight * d.value
        err += weight * d.abs_error
    return DivergenceValue(value, err, support_flag(rho, sigma))


def d_f_upper_bound(f: ConvexFunction, rho, sigma) -> float:
    """Support-endpoint upper bound ``[f(x) - x f'(x)]_{x=1/R_back} + f'(R_fwd)``.

    ``R_fwd = exp(D_max(rho||sigma))`` and ``R_back = exp(D_max(sigma||rho))``;
    infinite endpoints use the registry limits ``f0`` and ``fp_inf``.
    """
    rho, sigma = validate_density(rho), validate_density(sigma)
    fwd = max_ratio(rho, sigma)
    back = max_ratio(sigma, rho)
    if math.isinf(back):
        first = f.f0
    else:
        x = 1.0 / back
        first = _scalar(f.f, x) - x * _scalar(f.fp, x)
    second = f.fp_inf if math.isinf(fwd) else _scalar(f.fp, fwd)
    return first + second


def classical_f_div(p, q, f: ConvexFunction) -> float:
    """``sum_x q(x) f(p(x)/q(x))`` with the usual boundary conventions."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must have equal length")
    total = []
    for px, qx in zip(p, q):
        if qx > 0 and px > 0:
            total.append(qx * _scalar(f.f, px / qx))
        elif qx > 0:
            total.append(qx * f.f0)
        elif px > 0:
            total.append(px * f.fp_inf)
    return math.fsum(total)


def kl_divergence(rho, sigma, rel_tol: float = DEFAULT_REL_TOL) -> DivergenceValue:
    return d_f_integral(kl(), rho, sigma, rel_tol)


__all__ = [
    "DivergenceValue",
    "QuadratureError",
    "chi2_closed",
    "classical_f_div",
    "d_f_degroot",
    "d_f_generalized",
    "d_f_integral",
    "d_f_single_integral",
    "d_f_upper_bound",
    "kl_divergence",
    "local_chi2_limit",
    "skew_divergence",
    "umegaki",
    "von_neumann_entropy",
]
