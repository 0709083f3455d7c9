"""Density matrices, classical-quantum states and Kraus channels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import eigvalsh, hermitian

#: Largest Hilbert-space dimension produced by :func:`tensor_power`.
MAX_DIM = 4096

NEG_EIG_TOL = 1e-10
TRACE_TOL = 1e-8


class StateError(ValueError):
    """Input does not describe a valid state or channel."""


class ResourceError(MemoryError):
    """Requested dimension exceeds the configured guard."""


def validate_density(m) -> np.ndarray:
    """Check that ``m`` is a density matrix and return it symmetrized.

    Tiny negative eigenvalues (above ``-1e-10``) are tolerated as rounding noise;
    the returned matrix is not altered beyond symmetrization.
    """
    rho = hermitian(m)
    w = eigvalsh(rho)
    if w[0] < -NEG_EIG_TOL:
        raise StateError(f"negative eigenvalue {w[0]:.6g}")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise StateError(f"trace {tr:.12g} deviates from 1")
    return rho


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def pure_state(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def basis_state(dim: int, k: int) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    out[k, k] = 1.0
    return out


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_density(dim: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Ginibre-induced random state ``G G^dagger / Tr(G G^dagger)``."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise StateError(f"rank {rank} outside [1, {dim}]")
    g = ginibre(np.random.default_rng(seed), dim, rank)
    rho = g @ g.conj().T
    return hermitian(rho / np.trace(rho).real)


def random_pure(dim: int, seed=None) -> np.ndarray:
    return random_density(dim, 1, seed)


def haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``rows x cols`` isometry via QR with the phase fix."""
    q, r = np.linalg.qr(ginibre(rng, rows, cols))
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_unitary(dim: int, seed=None) -> np.ndarray:
    return haar_isometry(dim, dim, np.random.default_rng(seed))


@dataclass(frozen=True)
class QuantumChannel:
    """CPTP map stored as Kraus operators, each ``dim_out x dim_in``."""

    kraus: tuple[np.ndarray, ...]
    dim_in: int = field(init=False)
    dim_out: int = field(init=False)

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise StateError("channel needs at least one Kraus operator")
        shape = ks[0].shape
        if any(k.ndim != 2 or k.shape != shape for k in ks):
            raise StateError("Kraus operators must share one 2-d shape")
        completeness = sum(k.conj().T @ k for k in ks)
        err = np.max(np.abs(completeness - np.eye(shape[1])))
        if err > 1e-9:
            raise StateError(f"Kraus completeness violated by {err:.3e}")
        object.__setattr__(self, "kraus", ks)
        object.__setattr__(self, "dim_out", shape[0])
        object.__setattr__(self, "dim_in", shape[1])

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply_channel(self, rho)

    def tensor_identity(self, ref_dim: int) -> "QuantumChannel":
        """The channel ``self ⊗ id_R`` with the reference system on the right."""
        eye = np.eye(ref_dim)
        return QuantumChannel(tuple(np.kron(k, eye) for k in self.kraus))

    def compose(self, other: "QuantumChannel") -> "QuantumChannel":
        """``self ∘ other``."""
        return QuantumChannel(tuple(a @ b for a in self.kraus for b in other.kraus))


def apply_channel(ch: QuantumChannel, rho: np.ndarray) -> np.ndarray:
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise StateError(f"state of shape {rho.shape} does not fit input dimension {ch.dim_in}")
    out = sum(k @ rho @ k.conj().T for k in ch.kraus)
    return hermitian(out)


def random_channel(dim_in: int, dim_out: int, env_dim: int, seed=None) -> QuantumChannel:
    """Stinespring dilation with a Haar isometry; Kraus ops read off per environment index."""
    if env_dim < 1:
        raise StateError("env_dim must be at least 1")
    if dim_out * env_dim < dim_in:
        raise StateError("dim_out * env_dim must be at least dim_in for an isometry")
    v = haar_isometry(dim_out * env_dim, dim_in, np.random.default_rng(seed))
    blocks = v.reshape(env_dim, dim_out, dim_in)
    return QuantumChannel(tuple(blocks))


def unitary_channel(u: np.ndarray) -> QuantumChannel:
    return QuantumChannel((np.asarray(u, dtype=complex),))


def identity_channel(dim: int) -> QuantumChannel:
    return unitary_channel(np.eye(dim))


def replacement_channel(sigma: np.ndarray, dim_in: int) -> QuantumChannel:
    """The constant channel ``rho -> Tr(rho) sigma``."""
    w, v = np.linalg.eigh(hermitian(sigma))
    kraus = []
    for s, u in zip(w, v.T):
        if s <= 0:
            continue
        for j in range(dim_in):
            k = np.zeros((sigma.shape[0], dim_in), dtype=complex)
            k[:, j] = np.sqrt(s) * u
            kraus.append(k)
    return QuantumChannel(tuple(kraus))


def depolarizing(p: float, sigma: np.ndarray) -> QuantumChannel:
    """Generalized depolarizing channel ``rho -> (1-p) rho + p Tr(rho) sigma``."""
    if not 0.0 <= p <= 1.0:
        raise StateError(f"p={p} outside [0, 1]")
    dim = sigma.shape[0]
    kraus = []
    if p < 1:
        kraus.append(np.sqrt(1 - p) * np.eye(dim, dtype=complex))
    if p > 0:
        kraus.extend(k * np.sqrt(p) for k in replacement_channel(sigma, dim).kraus)
    return QuantumChannel(tuple(kraus))


def tensor_power(rho: np.ndarray, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    if rho.shape[0] ** n > MAX_DIM:
        raise ResourceError(f"dimension {rho.shape[0]}**{n} exceeds the guard {MAX_DIM}")
    out = rho
    for _ in range(n - 1):
        out = np.kron(out, rho)
    return out


@dataclass(frozen=True)
class CQState:
    """Classical-quantum state ``sum_u p(u) |u><u| ⊗ rho_u``."""

    probs: np.ndarray
    conditionals: tuple[np.ndarray, ...]

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or len(p) != len(self.conditionals) or len(p) == 0:
            raise StateError("probs and conditionals must be non-empty and equally long")
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-10:
            raise StateError("probs must be a probability vector")
        conds = tuple(validate_density(c) for c in self.conditionals)
        if len({c.shape for c in conds}) != 1:
            raise StateError("conditionals must share one dimension")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "conditionals", conds)

    def average(self) -> np.ndarray:
        return hermitian(sum(p * c for p, c in zip(self.probs, self.conditionals)))


def cq_embed(cq: CQState) -> np.ndarray:
    """Block-diagonal matrix of the cq state with the label system first."""
    n = len(cq.probs)
    d = cq.conditionals[0].shape[0]
    out = np.zeros((n * d, n * d), dtype=complex)
    for u, (p, c) in enumerate(zip(cq.probs, cq.conditionals)):
        out[u * d:(u + 1) * d, u * d:(u + 1) * d] = p * c
    return out
