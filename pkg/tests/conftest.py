import numpy as np
import pytest

from qfdiv.states import random_density


def diag(*xs):
    return np.diag(np.asarray(xs, dtype=float)).astype(complex)


@pytest.fixture
def diagonal_pair():
    """(0.9, 0.1) against (0.5, 0.5): KL = 0.368064, chi2 = 0.64."""
    return diag(0.9, 0.1), diag(0.5, 0.5)


@pytest.fixture
def qutrit_pair():
    """Qutrit pair used for the Renyi alpha sweeps."""
    rho = np.array([[5, 4, 2], [4, 5, 2], [2, 2, 2]], dtype=complex) / 12
    return rho, diag(5, 2, 1) / 8


@pytest.fixture
def nonadditive_pair():
    """Qubit pair whose order-2 integral Renyi divergence is visibly non-additive."""
    rho = np.array([[0.7, 0.21 + 0.22j], [0.21 - 0.22j, 0.3]])
    sigma = np.array([[0.9, -0.06 + 0.04j], [-0.06 - 0.04j, 0.1]])
    return rho, sigma


def random_pairs(n, dims=(2, 3, 4), seed=0, rank=None):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        d = dims[i % len(dims)]
        out.append((random_density(d, rank, rng), random_density(d, rank, rng)))
    return out


def commuting_pairs(n, dims=(2, 3), seed=0, zeros=False):
    """Pairs diagonal in a common random basis; returns (p, q, rho, sigma)."""
    from qfdiv.states import haar_unitary

    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        d = dims[i % len(dims)]
        p, q = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
        if zeros and d > 2:
            p[0] = 0.0
            p /= p.sum()
        u = haar_unitary(d, seed=rng)
        out.append((p, q, u @ np.diag(p) @ u.conj().T, u @ np.diag(q) @ u.conj().T))
    return out


# criterion number -> list of (ok, detail) parts, filled by the acceptance suite
VERDICTS: dict[int, list[tuple[bool, str]]] = {}


def record_verdict(n, ok, detail):
    VERDICTS.setdefault(n, []).append((bool(ok), detail))
    return bool(ok)


def verdict_lines():
    lines = []
    for n in sorted(VERDICTS):
        parts = VERDICTS[n]
        tag = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        lines.append(f"{tag} criterion {n}: " + "; ".join(d for _, d in parts))
    return lines


def pytest_terminal_summary(terminalreporter):
    lines = verdict_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
