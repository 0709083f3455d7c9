"""Hockey-stick divergence and the metrics derived from it."""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .linalg import SUPPORT_TOL, eigh, eigvalsh, matrix_sqrt, support_mask, trace_norm

PSD_TOL = 1e-10


class PSDError(ValueError):
    """An argument expected to be positive semidefinite is not."""


def _check_psd(a: np.ndarray, name: str) -> None:
    w = eigvalsh(a)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -PSD_TOL * scale:
        raise PSDError(f"{name} has negative eigenvalue {w[0]:.6g}")


def e_gamma_unchecked(a: np.ndarray, b: np.ndarray, gammas) -> np.ndarray:
    """Vectorized ``E_gamma(a||b)`` over an array of gammas, without input checks.

    Uses the definition ``Tr(a - g b)_+ - (Tr(a - g b))_+`` so it is valid for
    unnormalized positive operators.
    """
    g = np.asarray(gammas, dtype=float)
    flat = g.ravel()
    stack = a[None, :, :] - flat[:, None, None] * b[None, :, :]
    w = eigvalsh(stack)
    pos = np.where(w > 0, w, 0.0).sum(axis=1)
    gap = np.trace(a).real - flat * np.trace(b).real
    out = pos - np.maximum(gap, 0.0)
    return np.maximum(out, 0.0).reshape(g.shape)


def e_gamma(a: np.ndarray, b: np.ndarray, gamma: float) -> float:
    """Hockey-stick divergence ``E_gamma(A||B)`` for PSD ``A``, ``B`` and ``gamma >= 0``."""
    if gamma < 0 or not math.isfinite(gamma):
        raise ValueError(f"gamma must be finite and non-negative, got {gamma}")
    _check_psd(a, "A")
    _check_psd(b, "B")
    return float(e_gamma_unchecked(a, b, [gamma])[0])


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return 0.5 * trace_norm(rho - sigma)


def kernel_basis(b: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the kernel of PSD ``b`` (support tolerance applied)."""
    w, v = eigh(b)
    return v[:, ~support_mask(w)]


def kernel_weight(a: np.ndarray, b: np.ndarray) -> float:
    """``Tr(P a)`` where ``P`` projects onto the kernel of ``b``.

    This is the limit of ``E_gamma(a||b)`` as ``gamma -> inf`` for states.
    """
    k = kernel_basis(b)
    if k.shape[1] == 0:
        return 0.0
    return max(float(np.trace(k.conj().T @ a @ k).real), 0.0)


def support_contained(a: np.ndarray, b: np.ndarray) -> bool:
    """Whether ``supp(a)`` lies inside ``supp(b)`` up to the support tolerance."""
    return kernel_weight(a, b) <= SUPPORT_TOL * max(float(np.trace(a).real), 1e-300)


def orthogonal(a: np.ndarray, b: np.ndarray) -> bool:
    overlap = float(np.trace(a @ b).real)
    scale = float(np.trace(a).real * np.trace(b).real)
    return overlap <= SUPPORT_TOL * scale


def support_flag(rho: np.ndarray, sigma: np.ndarray) -> str:
    """Classify the pair as ``full``, ``first_in_second``, ``disjoint`` or ``other``."""
    if orthogonal(rho, sigma):
        return "disjoint"
    fwd = support_contained(rho, sigma)
    bwd = support_contained(sigma, rho)
    if fwd and bwd:
        return "full"
    if fwd:
        return "first_in_second"
    return "other"


def max_ratio(a: np.ndarray, b: np.ndarray) -> float:
    """Largest ``t`` with ``a <= t b``, or ``inf`` when supports are not nested."""
    if not support_contained(a, b):
        return math.inf
    w, v = eigh(b)
    mask = support_mask(w)
    s = v[:, mask] / np.sqrt(w[mask])
    return float(eigvalsh(s.conj().T @ a @ s)[-1])


def d_max(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Max-relative entropy (natural log)."""
    r = max_ratio(rho, sigma)
    if math.isinf(r):
        return math.inf
    return math.log(r) if r > 0 else -math.inf


def thompson(rho: np.ndarray, sigma: np.ndarray) -> float:
    return max(d_max(rho, sigma), d_max(sigma, rho))


def hilbert_omega(rho: np.ndarray, sigma: np.ndarray) -> float:
    return d_max(rho, sigma) + d_max(sigma, rho)


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Root fidelity ``||sqrt(rho) sqrt(sigma)||_1``."""
    s = np.linalg.svd(matrix_sqrt(rho) @ matrix_sqrt(sigma), compute_uv=False)
    return float(np.sum(s))


def bayes_error(p: float, rho: np.ndarray, sigma: np.ndarray) -> float:
    """Minimal error probability for prior ``p`` on ``rho`` and ``1 - p`` on ``sigma``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"prior {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    if p <= 0.5:
        return p - p * float(e_gamma_unchecked(rho, sigma, [(1 - p) / p])[0])
    return (1 - p) - (1 - p) * float(e_gamma_unchecked(sigma, rho, [p / (1 - p)])[0])


def degroot_info(p: float, rho: np.ndarray, sigma: np.ndarray) -> float:
    """Statistical information: prior error minus Bayes error."""
    return min(p, 1 - p) - bayes_error(p, rho, sigma)


def pencil_breakpoints(a: np.ndarray, b: np.ndarray, lo: float, hi: float) -> list[float]:
    """Finite real roots of ``det(a - g b) = 0`` strictly inside ``(lo, hi)``.

    These are the only places where ``g -> Tr(a - g b)_+`` can have a kink, so
    quadrature panels are split there.
    """
    alpha, beta = scipy.linalg.eigvals(a, b, homogeneous_eigvals=True)
    pts = []
    for x, y in zip(alpha, beta):
        if abs(y) <= 1e-14 * max(abs(x), 1e-300):
            continue
        g = x / y
        if abs(g.imag) > 1e-8 * max(1.0, abs(g.real)):
            continue
        g = g.real
        if lo < g < hi and math.isfinite(g):
            pts.append(g)
    pts.sort()
    merged: list[float] = []
    for g in pts:
        if not merged or g - merged[-1] > 1e-10 * g:
            merged.append(g)
    # Points hugging an endpoint would only create sliver panels.
    scale = hi if math.isfinite(hi) else max(merged, default=1.0)
    return [g for g in merged if g - lo > 1e-12 * scale and (hi - g > 1e-12 * scale)]
