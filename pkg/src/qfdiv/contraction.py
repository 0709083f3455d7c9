"""Contraction coefficients of channels, with explicit lower-bound semantics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .fdiv import DEFAULT_REL_TOL, DivergenceValue, d_f_integral
from .functions import ConvexFunction, depol_pullback
from .hockey import e_gamma_unchecked
from .linalg import eigh, hermitian, inverse_log_mean, support_mask
from .states import (
    CQState,
    QuantumChannel,
    apply_channel,
    cq_embed,
    depolarizing,
    random_density,
    validate_density,
)

KINDS = ("exact_closed_form", "optimized_lower_bound", "sampled_lower_bound")


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_iters: int = 500
    step_tol: float = 1e-10
    seed: int = 0

    def rng(self, restart: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, restart])


@dataclass(frozen=True)
class ContractionEstimate:
    value: float
    kind: str
    witness: dict = field(default_factory=dict, repr=False)


def _pure_outputs(ch: QuantumChannel, vecs: np.ndarray) -> np.ndarray:
    """Channel outputs for the pure states given as columns of ``vecs``."""
    ks = np.stack(ch.kraus)  # (r, out, in)
    a = np.einsum("roi,ic->cro", ks, vecs)  # (cols, r, out)
    return np.einsum("cro,crp->cop", a, a.conj())


def _orthonormal_pair(x: np.ndarray, d: int) -> np.ndarray:
    m = (x[: 2 * d] + 1j * x[2 * d:]).reshape(d, 2)
    q, _ = np.linalg.qr(m)
    return q


def _multistart(objective, dim: int, cfg: OptimizerConfig, starts=()):
    """Minimize ``objective`` by Nelder-Mead from seeded random starts plus ``starts``."""
    xs = [np.asarray(s, dtype=float) for s in starts]
    xs += [cfg.rng(i).standard_normal(dim) for i in range(cfg.restarts)]
    best = None
    opts = {"maxiter": cfg.max_iters, "xatol": cfg.step_tol, "fatol": cfg.step_tol}
    for x0 in xs:
        res = scipy.optimize.minimize(objective, x0, method="Nelder-Mead", options=opts)
        if best is None or res.fun < best.fun:
            best = res
    # One polishing pass from the winner with a larger budget.
    res = scipy.optimize.minimize(objective, best.x, method="Nelder-Mead",
                                  options={**opts, "maxiter": 4 * cfg.max_iters})
    return res if res.fun <= best.fun else best


def eta_gamma(channel: QuantumChannel, gamma: float, cfg: OptimizerConfig | None = None) -> ContractionEstimate:
    """Largest ``E_gamma`` between channel outputs of orthogonal pure inputs."""
    if gamma < 1:
        raise ValueError("gamma must be at least 1")
    cfg = cfg or OptimizerConfig()
    d = channel.dim_in

    def value_at(x):
        outs = _pure_outputs(channel, _orthonormal_pair(x, d))
        return float(e_gamma_unchecked(outs[0], outs[1], [gamma])[0])

    # Computational basis pair as a deterministic extra start.
    start = np.zeros(4 * d)
    start[0], start[d + 1] = 1.0, 1.0
    res = _multistart(lambda x: -value_at(x), 4 * d, cfg, [start])
    pair = _orthonormal_pair(res.x, d)
    value = min(max(value_at(res.x), 0.0), 1.0)
    witness = {"psi": np.outer(pair[:, 0], pair[:, 0].conj()),
               "phi": np.outer(pair[:, 1], pair[:, 1].conj())}
    return ContractionEstimate(value, "optimized_lower_bound", witness)


def eta_tr(channel: QuantumChannel, cfg: OptimizerConfig | None = None) -> ContractionEstimate:
    """Trace-distance (Dobrushin) contraction coefficient, i.e. ``eta_gamma`` at 1."""
    return eta_gamma(channel, 1.0, cfg)


def traceless_basis(d: int) -> list[np.ndarray]:
    """Hilbert-Schmidt orthonormal basis of traceless Hermitian ``d x d`` matrices."""
    out = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1 / np.sqrt(2)
            out.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k], m[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            out.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        out.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return out


def _chi2_gram(sigma: np.ndarray, mats: list[np.ndarray]) -> np.ndarray:
    """Gram matrix of the chi-square quadratic form at ``sigma`` on ``mats``."""
    w, v = eigh(sigma)
    mask = support_mask(w)
    lam, vs = w[mask], v[:, mask]
    c = inverse_log_mean(lam[:, None], lam[None, :])
    rot = np.stack([vs.conj().T @ m @ vs for m in mats])
    g = np.einsum("aij,bij,ij->ab", rot.conj(), rot, c).real
    return (g + g.T) / 2


def _linear_action(ch: QuantumChannel, m: np.ndarray) -> np.ndarray:
    return sum(k @ m @ k.conj().T for k in ch.kraus)


def eta_x2_local(channel: QuantumChannel, sigma, cfg: OptimizerConfig | None = None) -> ContractionEstimate:
    """``sup_rho chi2(A rho||A sigma)/chi2(rho||sigma)`` at fixed full-rank ``sigma``.

    Both chi-square values are quadratic forms in ``rho - sigma``, so the
    supremum is the top generalized eigenvalue of the output Gram matrix
    against the input one, over traceless Hermitian directions. ``cfg`` is
    accepted for interface symmetry and unused.
    """
    sigma = validate_density(sigma)
    w = np.linalg.eigvalsh(sigma)
    if w[0] <= 1e-12 * w[-1]:
        raise ValueError("eta_x2_local needs a full-rank sigma")
    d = sigma.shape[0]
    basis = traceless_basis(d)
    if not basis:
        return ContractionEstimate(0.0, "exact_closed_form", {})
    g_in = _chi2_gram(sigma, basis)
    out_sigma = apply_channel(channel, sigma)
    g_out = _chi2_gram(out_sigma, [_linear_action(channel, b) for b in basis])
    vals, vecs = scipy.linalg.eigh(g_out, g_in)
    top = vecs[:, -1]
    delta = hermitian(sum(c * b for c, b in zip(top, basis)))
    step = 0.5 * w[0] / np.max(np.abs(np.linalg.eigvalsh(delta)))
    rho = sigma + step * delta
    value = min(max(float(vals[-1]), 0.0), 1.0)
    return ContractionEstimate(value, "exact_closed_form",
                               {"rho": rho, "sigma": sigma, "direction": delta})


def _density_from_params(x: np.ndarray, d: int) -> np.ndarray:
    g = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
    m = g @ g.conj().T + 1e-9 * np.eye(d)
    return hermitian(m / np.trace(m).real)


def eta_x2_global(channel: QuantumChannel, cfg: OptimizerConfig | None = None) -> ContractionEstimate:
    """Optimize :func:`eta_x2_local` over full-rank ``sigma``; a lower bound on the global value."""
    cfg = cfg or OptimizerConfig()
    d = channel.dim_in

    def neg(x):
        return -eta_x2_local(channel, _density_from_params(x, d)).value

    start = np.concatenate([np.eye(d).ravel(), np.zeros(d * d)])
    res = _multistart(neg, 2 * d * d, cfg, [start])
    sigma = _density_from_params(res.x, d)
    local = eta_x2_local(channel, sigma)
    return ContractionEstimate(local.value, "optimized_lower_bound", local.witness)


def _ratio(channel, f, rho, sigma, rel_tol):
    den = d_f_integral(f, rho, sigma, rel_tol).value
    if not math.isfinite(den) or den < 1e-12:
        return None
    num = d_f_integral(f, apply_channel(channel, rho), apply_channel(channel, sigma), rel_tol).value
    if not math.isfinite(num):
        return None
    return num / den


def local_candidates(sigma: np.ndarray, direction: np.ndarray, fractions=(0.05, 0.01, 0.002)):
    """States ``sigma ± t direction`` for shrinking ``t`` inside the PSD cone."""
    lo = np.linalg.eigvalsh(sigma)[0]
    scale = lo / np.max(np.abs(np.linalg.eigvalsh(direction)))
    for frac in fractions:
        for sign in (1, -1):
            yield validate_density(sigma + sign * frac * scale * direction)


def eta_f_sampled(channel: QuantumChannel, f: ConvexFunction, n_samples: int = 200, seed: int = 0,
                  fixed_sigma=None, cfg: OptimizerConfig | None = None,
                  rel_tol: float = 1e-10) -> ContractionEstimate:
    """Best ratio ``D_f(A rho||A sigma)/D_f(rho||sigma)`` over a candidate set.

    Candidates are seeded random pairs, the trace-contraction witness pair and
    small perturbations of ``sigma`` along the top chi-square direction (at the
    fixed ``sigma`` or at the optimized global one). Pairs with ``D_f`` below
    ``1e-12`` or infinite are skipped.
    """
    if not 0 < f.fpp_at_1 < math.inf:
        raise ValueError(f"{f.spec} needs finite positive f''(1)")
    cfg = cfg or OptimizerConfig(restarts=8, seed=seed)
    d = channel.dim_in
    rng = np.random.default_rng(seed)
    pairs = []
    if fixed_sigma is not None:
        sigma_star = validate_density(fixed_sigma)
        direction = eta_x2_local(channel, sigma_star).witness["direction"]
    else:
        wit = eta_tr(channel, cfg).witness
        pairs.append((wit["psi"], wit["phi"]))
        glob = eta_x2_global(channel, cfg)
        sigma_star, direction = glob.witness["sigma"], glob.witness["direction"]
    pairs += [(r, sigma_star) for r in local_candidates(sigma_star, direction)]
    for _ in range(n_samples):
        rho = random_density(d, int(rng.integers(1, d + 1)), rng)
        sigma = sigma_star if fixed_sigma is not None else random_density(d, d, rng)
        pairs.append((rho, sigma))
    best, best_pair = 0.0, None
    for rho, sigma in pairs:
        r = _ratio(channel, f, rho, sigma, rel_tol)
        if r is not None and r > best:
            best, best_pair = r, (rho, sigma)
    witness = {"rho": best_pair[0], "sigma": best_pair[1]} if best_pair else {}
    return ContractionEstimate(min(best, 1.0), "sampled_lower_bound", witness)


def depol_pullback_divergence(f: ConvexFunction, p: float, sigma, rho, rel_tol: float = DEFAULT_REL_TOL,
                              return_both: bool = False):
    """``D_f(D_p(rho)||sigma)`` for the depolarizing channel towards ``sigma``.

    The same number equals ``D_F(rho||sigma)`` with ``F(x) = f((1-p)x + p)``;
    pass ``return_both=True`` to get ``(left, right)`` computed independently.
    """
    sigma, rho = validate_density(sigma), validate_density(rho)
    left = d_f_integral(f, apply_channel(depolarizing(p, sigma), rho), sigma, rel_tol)
    if not return_both:
        return left
    return left, d_f_integral(depol_pullback(f, p), rho, sigma, rel_tol)


def f_mutual_information(f: ConvexFunction, cq: CQState, rel_tol: float = DEFAULT_REL_TOL) -> DivergenceValue:
    """``sum_u p(u) D_f(rho_u||rho_avg)``, the direct-sum form of ``D_f(rho_UA||rho_U ⊗ rho_A)``."""
    avg = cq.average()
    value, err = 0.0, 0.0
    for p, cond in zip(cq.probs, cq.conditionals):
        if p == 0:
            continue
        d = d_f_integral(f, cond, avg, rel_tol)
        value += p * d.value
        err += p * d.abs_error
    return DivergenceValue(value, err, "full" if math.isfinite(value) else "other")


def f_mutual_information_embedded(f: ConvexFunction, cq: CQState, rel_tol: float = DEFAULT_REL_TOL) -> DivergenceValue:
    """Same quantity evaluated on the block-diagonal joint state directly."""
    joint = cq_embed(cq)
    product = np.kron(np.diag(cq.probs).astype(complex), cq.average())
    return d_f_integral(f, joint, product, rel_tol)


def less_noisy_falsifier(channel_m: QuantumChannel, channel_n: QuantumChannel, f: ConvexFunction,
                         n_samples: int = 200, seed: int = 0, rel_tol: float = 1e-10) -> dict:
    """Search for a pair with ``D_f(M rho||M sigma) < D_f(N rho||N sigma)``.

    A gap only counts when it exceeds the summed quadrature errors plus
    ``1e-10``. The report never asserts that the order holds.
    """
    if channel_m.dim_in != channel_n.dim_in:
        raise ValueError("channels must share an input dimension")
    d = channel_m.dim_in
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_samples):
        rho = random_density(d, int(rng.integers(1, d + 1)), rng)
        sigma = random_density(d, d, rng)
        dm = d_f_integral(f, apply_channel(channel_m, rho), apply_channel(channel_m, sigma), rel_tol)
        dn = d_f_integral(f, apply_channel(channel_n, rho), apply_channel(channel_n, sigma), rel_tol)
        if math.isinf(dn.value) and math.isinf(dm.value):
            continue
        gap = dn.value - dm.value
        worst = max(worst, gap) if math.isfinite(gap) else worst
        if gap > dm.abs_error + dn.abs_error + 1e-10:
            return {"status": "falsified", "n_checked": i + 1, "gap": gap,
                    "witness": {"rho": rho, "sigma": sigma}}
    return {"status": "inconclusive", "n_checked": n_samples, "gap": worst, "witness": None}


__all__ = [
    "ContractionEstimate",
    "OptimizerConfig",
    "depol_pullback_divergence",
    "eta_f_sampled",
    "eta_gamma",
    "eta_tr",
    "eta_x2_global",
    "eta_x2_local",
    "f_mutual_information",
    "f_mutual_information_embedded",
    "less_noisy_falsifier",
]
