import numpy as np
import pytest

from scatterlab import GroupSpec

ACCEPTANCE_LINES = []


def brute_dft(group: GroupSpec, values) -> np.ndarray:
    """f^(k) = sum_x f(x) conj(xi_k(x)), one character at a time."""
    return np.array([np.sum(values * np.conj(group.character(k))) for k in range(group.order)])


def brute_idft(group: GroupSpec, coeffs) -> np.ndarray:
    n = group.order
    return np.array([sum(coeffs[k] * group.character(k)[x] for k in range(n)) / n for x in range(n)])


def brute_convolve(group: GroupSpec, f, g) -> np.ndarray:
    out = np.zeros(group.order, dtype=complex)
    for x in range(group.order):
        for y in range(group.order):
            diff = group.index(tuple(a - b for a, b in zip(group.residues(x), group.residues(y))))
            out[x] += f[y] * g[diff]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
