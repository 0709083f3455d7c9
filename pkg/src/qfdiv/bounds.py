"""Reverse Pinsker, continuity, fidelity and amortized-channel inequalities.

Every check returns a :class:`BoundReport`. For ``direction="upper"`` the
inequality is ``lhs <= rhs``; for ``direction="lower"`` it is ``lhs >= rhs``.
``slack`` is always oriented so that a valid inequality has ``slack >= 0``.
Endpoints with infinite ``D_max`` give ``rhs = inf`` unless the relevant
integral converges, in which case its limit is used.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .contraction import OptimizerConfig, _multistart
from .fdiv import (
    DEFAULT_REL_TOL,
    _scalar,
    d_f_integral,
    von_neumann_entropy,
)
from .functions import ConvexFunction, hellinger, kl, skew
from .hockey import d_max, fidelity, max_ratio, trace_distance
from .linalg import eigvalsh
from .quadrature import integrate
from .renyi import DomainError
from .states import QuantumChannel, random_density, validate_density


@dataclass(frozen=True)
class BoundReport:
    lhs: float
    rhs: float
    bound_name: str
    inputs_digest: str
    abs_error: float = 0.0
    direction: str = "upper"

    @property
    def slack(self) -> float:
        hi, lo = (self.rhs, self.lhs) if self.direction == "upper" else (self.lhs, self.rhs)
        if hi == math.inf or lo == -math.inf:
            return math.inf
        return hi - lo

    def holds(self, factor: float = 10.0) -> bool:
        return self.slack >= -factor * self.abs_error

    def as_dict(self) -> dict:
        return {
            "bound_name": self.bound_name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "abs_error": self.abs_error,
            "direction": self.direction,
            "inputs_digest": self.inputs_digest,
        }


def digest(*arrays, **params) -> str:
    """SHA-256 over the raw bytes of the inputs and a canonical rendering of ``params``."""
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a, dtype=complex)
        h.update(repr(a.shape).encode())
        h.update(a.tobytes())
    for k in sorted(params):
        h.update(f"{k}={params[k]!r};".encode())
    return h.hexdigest()


def _times(c: float, e: float) -> float:
    """Coefficient times ``E_1``; an infinite coefficient on ``E_1 = 0`` stays 0."""
    return 0.0 if e == 0 else c * e


def _ratios(rho, sigma):
    return max_ratio(rho, sigma), max_ratio(sigma, rho)


def _fpp_integral(weight, top: float, limit: float, rel_tol: float) -> tuple[float, float]:
    """``int_1^top weight(g) dg`` in ``t = ln g``; ``limit`` is the value at ``top = inf``."""
    if math.isinf(top):
        return limit, 0.0
    if top <= 1.0:
        return 0.0, 0.0
    res = integrate(lambda t: weight(np.exp(t)) * np.exp(t), [0.0, math.log(top)],
                    rel_tol=rel_tol, abs_tol=1e-15)
    return res.value, res.error


def reverse_pinsker_f(f: ConvexFunction, rho, sigma,
                      rel_tol: float = DEFAULT_REL_TOL) -> tuple[BoundReport, BoundReport]:
    """``D_f <= zeta1 E_1 <= zeta2 E_1`` with both coefficients by quadrature.

    ``zeta1`` weights ``f''`` by the chord ``(R - g)/(R - 1)`` of ``E_g`` between
    ``g = 1`` and the support endpoint ``R``; ``zeta2`` drops the chord.
    """
    rho, sigma = validate_density(rho), validate_density(sigma)
    fwd, back = _ratios(rho, sigma)
    fp1 = _scalar(f.fp, 1.0)

    def mirror(g):
        return f.fpp(1.0 / g) / g**3

    def chord(w, top):
        return lambda g: w(g) * (top - g) / (top - 1.0)

    lim_direct = f.fp_inf - fp1
    lim_mirror = f.f0 + fp1
    z1a = _fpp_integral(chord(f.fpp, fwd), fwd, lim_direct, rel_tol)
    z1b = _fpp_integral(chord(mirror, back), back, lim_mirror, rel_tol)
    z2a = _fpp_integral(f.fpp, fwd, lim_direct, rel_tol)
    z2b = _fpp_integral(mirror, back, lim_mirror, rel_tol)

    e1 = trace_distance(rho, sigma)
    lhs = d_f_integral(f, rho, sigma, rel_tol)
    tag = digest(rho, sigma, f=f.spec)
    out = []
    for name, (a, b) in (("zeta1", (z1a, z1b)), ("zeta2", (z2a, z2b))):
        coeff = a[0] + b[0]
        err = lhs.abs_error + _times(a[1] + b[1], e1)
        out.append(BoundReport(lhs.value, _times(coeff, e1), f"reverse_pinsker_{name}", tag, err))
    return out[0], out[1]


def _newrevpin0_coeff(a: float, b: float) -> float:
    if math.isinf(a):
        return math.inf
    first = 1.0 if a <= 0 else a * math.exp(a) / math.expm1(a)
    if math.isinf(b):
        second = 0.0
    else:
        second = -1.0 if b <= 0 else -b / math.expm1(b)
    return first + second


def reverse_pinsker_kl(rho, sigma, include_chain: bool = False,
                       rel_tol: float = DEFAULT_REL_TOL) -> list[BoundReport]:
    """Relative-entropy reverse Pinsker bounds.

    Returns the tight chord bound, the Thompson-metric bound and the
    Hilbert-metric bound. ``include_chain`` appends the intermediate
    ``(1 + D_max(rho||sigma) - exp(-D_max(sigma||rho))) E_1`` bound.
    """
    rho, sigma = validate_density(rho), validate_density(sigma)
    a = max(d_max(rho, sigma), 0.0)
    b = max(d_max(sigma, rho), 0.0)
    e1 = trace_distance(rho, sigma)
    lhs = d_f_integral(kl(), rho, sigma, rel_tol)
    tag = digest(rho, sigma)
    coeffs = [
        ("newrevpin0", _newrevpin0_coeff(a, b)),
        ("thompson", max(a, b)),
        ("omega", a + b),
    ]
    if include_chain:
        coeffs.append(("newrevpin1", 1.0 + a - math.exp(-b)))
    return [BoundReport(lhs.value, _times(c, e1), f"kl_{name}", tag, lhs.abs_error)
            for name, c in coeffs]


def pinsker_lower(rho, sigma, rel_tol: float = DEFAULT_REL_TOL) -> BoundReport:
    """``D(rho||sigma) >= 2 E_1^2``."""
    rho, sigma = validate_density(rho), validate_density(sigma)
    lhs = d_f_integral(kl(), rho, sigma, rel_tol)
    e1 = trace_distance(rho, sigma)
    return BoundReport(lhs.value, 2 * e1 * e1, "pinsker", digest(rho, sigma),
                       lhs.abs_error, "lower")


def _xlog1p(lam: float, e1: float) -> float:
    """``lam * log(1 + e1/lam)`` continued to 0 at ``lam = 0``."""
    return 0.0 if lam <= 0 else lam * math.log1p(e1 / lam)


def audenaert_bound(rho, sigma, rel_tol: float = DEFAULT_REL_TOL) -> BoundReport:
    """Smallest-eigenvalue reverse Pinsker bound for the relative entropy."""
    rho, sigma = validate_density(rho), validate_density(sigma)
    lhs = d_f_integral(kl(), rho, sigma, rel_tol)
    e1 = trace_distance(rho, sigma)
    lr = max(float(eigvalsh(rho)[0]), 0.0)
    ls = max(float(eigvalsh(sigma)[0]), 0.0)
    if e1 == 0:
        rhs = 0.0
    elif ls <= 0:
        rhs = math.inf
    else:
        rhs = (ls + e1) * math.log1p(e1 / ls) - _xlog1p(lr, e1)
    return BoundReport(lhs.value, rhs, "audenaert", digest(rho, sigma), lhs.abs_error)


def reverse_pinsker_skew(rho, sigma, lam: float, hat: bool = False,
                         rel_tol: float = DEFAULT_REL_TOL) -> BoundReport:
    """Closed-form bound for the skewed relative entropies.

    With ``m = lam rho + (1-lam) sigma`` the divergence is
    ``(1-lam) D(rho||m) + lam D(sigma||m)``, or with the weights swapped when
    ``hat`` is set. ``hat`` with ``lam = 1/2`` is the Jensen-Shannon divergence.
    """
    if not 0 < lam < 1:
        raise ValueError("lam must lie in (0, 1)")
    rho, sigma = validate_density(rho), validate_density(sigma)
    a = max(d_max(rho, sigma), 0.0)
    b = max(d_max(sigma, rho), 0.0)
    l = lam

    def log_mix(p: float, q: float, x: float) -> float:
        # x - log(p + q e^x), stable for large or infinite x
        if math.isinf(x):
            return -math.log(q)
        return -math.log(p * math.exp(-x) + q)

    if hat:
        coeff = l * log_mix(1 - l, l, a) + (1 - l) * log_mix(l, 1 - l, b)
    else:
        inv_a = 0.0 if math.isinf(a) else 1.0 / (1 - l + l * math.exp(a))
        inv_b = 0.0 if math.isinf(b) else 1.0 / (l + (1 - l) * math.exp(b))
        coeff = ((1 - 2 * l) * (inv_a - inv_b)
                 + (1 - l) * log_mix(1 - l, l, a) + l * log_mix(l, 1 - l, b))
    f = skew(kl(), l, 1 - l if hat else l)
    lhs = d_f_integral(f, rho, sigma, rel_tol)
    e1 = trace_distance(rho, sigma)
    name = "skew_hat" if hat else "skew"
    return BoundReport(lhs.value, _times(coeff, e1), name, digest(rho, sigma, lam=l), lhs.abs_error)


def _hellinger_coeff(alpha: float, a: float, b: float) -> float:
    """``(alpha e^{(alpha-1)a} - (alpha-1) e^{-alpha b} - 1)/(alpha-1)`` with limits."""
    first = math.exp((alpha - 1) * a) if not (math.isinf(a) and alpha < 1) else 0.0
    second = math.exp(-alpha * b)
    if math.isinf(first):
        return math.inf
    return (alpha * first - (alpha - 1) * second - 1) / (alpha - 1)


def reverse_pinsker_hellinger(rho, sigma, alpha: float,
                              rel_tol: float = DEFAULT_REL_TOL) -> tuple[BoundReport, BoundReport]:
    """Hellinger reverse Pinsker bound and the induced Renyi bound."""
    if alpha <= 0 or alpha == 1:
        raise DomainError(f"alpha={alpha} must be positive and not 1")
    rho, sigma = validate_density(rho), validate_density(sigma)
    a = max(d_max(rho, sigma), 0.0)
    b = max(d_max(sigma, rho), 0.0)
    e1 = trace_distance(rho, sigma)
    c = _times(_hellinger_coeff(alpha, a, b), e1)
    h = d_f_integral(hellinger(alpha), rho, sigma, rel_tol)
    tag = digest(rho, sigma, alpha=alpha)
    h_report = BoundReport(h.value, c, "hellinger", tag, h.abs_error)

    def to_renyi(x: float) -> float:
        arg = 1.0 + (alpha - 1.0) * x
        if math.isinf(x) or arg <= 0:
            return math.inf
        return math.log(arg) / (alpha - 1.0)

    d_lhs = to_renyi(h.value)
    d_err = h.abs_error / max(1.0 + (alpha - 1.0) * h.value, 1e-300)
    return h_report, BoundReport(d_lhs, to_renyi(c), "renyi_from_hellinger", tag, d_err)


def fvdg_improved(rho, sigma) -> BoundReport:
    """``F >= 1 - (2 - e^{-D_max(rho||sigma)/2} - e^{-D_max(sigma||rho)/2}) E_1 / 2``."""
    rho, sigma = validate_density(rho), validate_density(sigma)
    a, b = d_max(rho, sigma), d_max(sigma, rho)
    e1 = trace_distance(rho, sigma)
    rhs = 1.0 - 0.5 * (2.0 - math.exp(-0.5 * a) - math.exp(-0.5 * b)) * e1
    return BoundReport(fidelity(rho, sigma), rhs, "fvdg_improved", digest(rho, sigma),
                       1e-12, "lower")


def fvdg_previous(rho, sigma) -> BoundReport:
    """Comparator ``F >= 1 - e^{D/2}/(1 + e^{D/2}) E_1`` with ``D = D_max(rho||sigma)``."""
    rho, sigma = validate_density(rho), validate_density(sigma)
    a = d_max(rho, sigma)
    w = 1.0 if math.isinf(a) else 1.0 / (1.0 + math.exp(-0.5 * a))
    rhs = 1.0 - w * trace_distance(rho, sigma)
    return BoundReport(fidelity(rho, sigma), rhs, "fvdg_previous", digest(rho, sigma),
                       1e-12, "lower")


def _continuity_coeff(f: ConvexFunction, a: float, b: float, rel_tol: float) -> tuple[float, float]:
    """``int_1^{e^a} f''(s) ds + int_1^{e^b} s^-2 f''(1/s) ds``.

    Closed forms for the registry members with one; otherwise quadrature, and
    ``inf`` when either endpoint is infinite.
    """
    if f.name == "kl":
        return a + b, 0.0
    if f.name == "js":
        first = 0.5 * (math.log(2) - math.log1p(math.exp(-a)))
        second = math.inf if math.isinf(b) else 0.5 * (math.log1p(math.exp(b)) - math.log(2))
        return first + second, 0.0
    if f.name == "hellinger":
        al = f.params["alpha"]
        first = math.exp((al - 1) * a) if not (math.isinf(a) and al < 1) else 0.0
        second = math.exp((1 - al) * b) if not (math.isinf(b) and al > 1) else 0.0
        return al / (al - 1) * (first - second), 0.0
    if math.isinf(a) or math.isinf(b):
        return math.inf, 0.0
    va, ea = _fpp_integral(f.fpp, math.exp(a), math.inf, rel_tol)
    vb, eb = _fpp_integral(lambda s: f.fpp(1.0 / s) / s**2, math.exp(b), math.inf, rel_tol)
    return va + vb, ea + eb


def continuity_first_arg(f: ConvexFunction, rho, tau, sigma,
                         rel_tol: float = DEFAULT_REL_TOL) -> BoundReport:
    """``D_f(rho||sigma) - D_f(tau||sigma) <= c(rho, sigma) E_1(rho||tau)``."""
    rho, tau, sigma = (validate_density(x) for x in (rho, tau, sigma))
    a = max(d_max(rho, sigma), 0.0)
    b = max(d_max(sigma, rho), 0.0)
    coeff, cerr = _continuity_coeff(f, a, b, rel_tol)
    e1 = trace_distance(rho, tau)
    d1 = d_f_integral(f, rho, sigma, rel_tol)
    d2 = d_f_integral(f, tau, sigma, rel_tol)
    if math.isinf(d1.value) and math.isinf(d2.value):
        lhs = -math.inf
    else:
        lhs = d1.value - d2.value
    return BoundReport(lhs, _times(coeff, e1), f"continuity_{f.name}",
                       digest(rho, tau, sigma, f=f.spec),
                       d1.abs_error + d2.abs_error + _times(cerr, e1))


def entropy_continuity(rho, sigma) -> BoundReport:
    """``|S(rho) - S(sigma)| <= log(max condition number) E_1`` for full-rank states."""
    rho, sigma = validate_density(rho), validate_density(sigma)
    conds = []
    for x in (rho, sigma):
        w = eigvalsh(x)
        conds.append(math.inf if w[0] <= 0 else w[-1] / w[0])
    lhs = abs(von_neumann_entropy(rho) - von_neumann_entropy(sigma))
    rhs = _times(math.log(max(conds)), trace_distance(rho, sigma))
    return BoundReport(lhs, rhs, "entropy_continuity", digest(rho, sigma), 1e-12)


def xi(f: ConvexFunction) -> float:
    """``int_1^inf f''(g) + g^-3 f''(1/g) dg``, equal to ``f'(inf) + f(0+)``."""
    return f.fp_inf + f.f0


def _pure_bipartite(x: np.ndarray, d: int) -> np.ndarray:
    v = x[: d * d] + 1j * x[d * d:]
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def diamond_e1_lower(channel_n: QuantumChannel, channel_m: QuantumChannel,
                     cfg: OptimizerConfig | None = None) -> tuple[float, np.ndarray]:
    """Lower bound on the stabilized trace distance with a reference copy of the input."""
    if (channel_n.dim_in, channel_n.dim_out) != (channel_m.dim_in, channel_m.dim_out):
        raise ValueError("channels must share input and output dimensions")
    cfg = cfg or OptimizerConfig(restarts=8)
    d = channel_n.dim_in
    big_n, big_m = channel_n.tensor_identity(d), channel_m.tensor_identity(d)

    def value_at(x):
        psi = _pure_bipartite(x, d)
        return trace_distance(big_n(psi), big_m(psi))

    res = _multistart(lambda x: -value_at(x), 2 * d * d, cfg)
    return min(value_at(res.x), 1.0), _pure_bipartite(res.x, d)


def amortized_bound(f: ConvexFunction, channel_m: QuantumChannel, channel_n: QuantumChannel,
                    cfg: OptimizerConfig | None = None, n_samples: int = 16,
                    rel_tol: float = 1e-6) -> BoundReport:
    """Sampled amortized divergence of ``N`` against ``M`` versus ``xi(f) E_1``.

    The left side is a lower bound: the largest observed value of
    ``D_f(N⊗id(rho)||M⊗id(sigma)) - D_f(rho||sigma)`` over the optimized
    diamond witness and ``n_samples`` random input pairs.
    """
    x = xi(f)
    if math.isinf(x):
        raise DomainError(f"xi({f.spec}) diverges; the amortized bound is vacuous")
    cfg = cfg or OptimizerConfig(restarts=8)
    e1, psi = diamond_e1_lower(channel_n, channel_m, cfg)
    d = channel_n.dim_in
    big_n, big_m = channel_n.tensor_identity(d), channel_m.tensor_identity(d)
    rng = np.random.default_rng([cfg.seed, 7919])
    pairs = [(psi, psi)]
    pairs += [(random_density(d * d, seed=rng), random_density(d * d, seed=rng))
              for _ in range(n_samples)]
    best, best_err = -math.inf, 0.0
    for rho, sigma in pairs:
        out = d_f_integral(f, big_n(rho), big_m(sigma), rel_tol)
        inp = d_f_integral(f, rho, sigma, rel_tol)
        gap = out.value - inp.value
        if gap > best:
            best, best_err = gap, out.abs_error + inp.abs_error
    tag = digest(*channel_n.kraus, *channel_m.kraus, f=f.spec)
    return BoundReport(best, x * e1, f"amortized_{f.name}", tag, best_err)


__all__ = [
    "BoundReport",
    "amortized_bound",
    "audenaert_bound",
    "continuity_first_arg",
    "diamond_e1_lower",
    "digest",
    "entropy_continuity",
    "fvdg_improved",
    "fvdg_previous",
    "pinsker_lower",
    "reverse_pinsker_f",
    "reverse_pinsker_hellinger",
    "reverse_pinsker_kl",
    "reverse_pinsker_skew",
    "xi",
]
