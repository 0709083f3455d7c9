"""Dense Hermitian linear algebra.

Operators are plain complex ``numpy`` arrays. :func:`hermitian` is the single
entry point that validates shape and symmetrizes; everything else assumes its
input already went through it (or is exactly Hermitian by construction).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

#: Relative threshold below which an eigenvalue counts as zero for support decisions.
SUPPORT_TOL = 1e-12


class EigenError(ArithmeticError):
    """The Hermitian eigensolver failed to converge."""


class SupportError(ValueError):
    """A negative power was requested on a singular operator outside its support."""


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitian(m) -> np.ndarray:
    """Return ``(M + M^dagger)/2`` as a complex array, checking the shape."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return (a + a.conj().T) / 2


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # Make the largest-magnitude entry of each column real and positive.
    idx = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(pivots) / pivots)


def eigh(h: np.ndarray) -> Spectrum:
    """Eigendecomposition with ascending eigenvalues and a fixed phase convention."""
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigenError(
            f"eigensolver did not converge (dim={h.shape[0]}, "
            f"max-norm={np.max(np.abs(h)):.3e})"
        ) from exc
    return Spectrum(w, _fix_phases(v))


def eigvalsh(h: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise EigenError(
            f"eigensolver did not converge (dim={h.shape[-1]}, "
            f"max-norm={np.max(np.abs(h)):.3e})"
        ) from exc


def positive_part_trace(h: np.ndarray) -> float:
    """Sum of the positive eigenvalues."""
    w = eigvalsh(h)
    return float(np.sum(w[w > 0]))


def trace_norm(h: np.ndarray) -> float:
    return float(np.sum(np.abs(eigvalsh(h))))


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def support_mask(w: np.ndarray, tol: float = SUPPORT_TOL) -> np.ndarray:
    """Boolean mask of eigenvalues that belong to the support."""
    top = np.max(np.abs(w)) if w.size else 0.0
    return w > tol * top


def support_projector(h: np.ndarray, tol: float = SUPPORT_TOL) -> np.ndarray:
    w, v = eigh(h)
    keep = v[:, support_mask(w, tol)]
    return keep @ keep.conj().T


def _spectral_apply(h: np.ndarray, fn) -> np.ndarray:
    w, v = eigh(h)
    mask = support_mask(w)
    vals = np.zeros_like(w)
    vals[mask] = fn(w[mask])
    return (v * vals) @ v.conj().T


def matrix_log(h: np.ndarray) -> np.ndarray:
    """Natural logarithm on the support; zero on the kernel."""
    return _spectral_apply(h, np.log)


def matrix_power(h: np.ndarray, t: float, on_support: bool = True) -> np.ndarray:
    """``h**t`` for PSD ``h``.

    With ``on_support=True`` (the default) zero eigenvalues map to zero for any
    exponent, which is the generalized-inverse convention. Passing
    ``on_support=False`` with ``t < 0`` and a singular ``h`` raises
    :class:`SupportError`.
    """
    if t == 0:
        w, v = eigh(h)
        keep = v[:, support_mask(w)]
        return keep @ keep.conj().T
    if not on_support and t < 0:
        w = eigvalsh(h)
        if not np.all(support_mask(w)):
            raise SupportError(
                f"support violation: exponent {t} applied to a singular operator"
            )
    return _spectral_apply(h, lambda x: x**t)


def matrix_sqrt(h: np.ndarray) -> np.ndarray:
    return _spectral_apply(h, np.sqrt)


def pseudo_inverse_sqrt(h: np.ndarray) -> np.ndarray:
    return _spectral_apply(h, lambda x: x**-0.5)


def inverse_log_mean(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``(ln x - ln y)/(x - y)``, with the diagonal limit ``1/x``."""
    r = x / y - 1.0
    small = np.abs(r) < 1e-4
    rs = np.where(small, 0.0, r)
    exact = np.log1p(rs) / np.where(small, 1.0, y * rs)
    series = (1 - r / 2 + r * r / 3 - r**3 / 4) / y
    return np.where(small, series, exact)
