"""Shared helpers: an independent dense operator oracle and parameter draws.

The dense builders below use plain np.kron chains and never touch the
package's sparse construction path, so they can serve as an oracle for it.
"""

import numpy as np
import pytest

DENSE_PAULI = {
    0: np.array([[0, 1], [1, 0]], dtype=complex),
    1: np.array([[0, -1j], [1j, 0]], dtype=complex),
    2: np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_embed(n, site, axis):
    out = np.eye(1, dtype=complex)
    for s in range(n):
        out = np.kron(out, DENSE_PAULI[axis] if s == site else np.eye(2))
    return out


def dense_charge(field, coupling, i):
    field = np.asarray(field, dtype=float)
    coupling = np.asarray(coupling, dtype=float)
    n = field.shape[0]
    out = np.zeros((2**n, 2**n), dtype=complex)
    for a in range(3):
        if field[i, a]:
            out += field[i, a] * dense_embed(n, i, a)
        for k in range(n):
            if k != i and coupling[i, k, a]:
                out += coupling[i, k, a] * dense_embed(n, i, a) @ dense_embed(n, k, a)
    return out


def draw_epsilon(rng, n, base_gap=1.0, jitter=0.3):
    """Distinct levels on a jittered grid; gaps stay >= base_gap - 2*jitter."""
    return np.arange(n) * base_gap + rng.uniform(-jitter, jitter, size=n)


def draw_pip_epsilon(rng, n, start=1.0, base_gap=0.7, jitter=0.25):
    """Positive levels with well-separated squares."""
    return start + np.arange(n) * base_gap + rng.uniform(-jitter, jitter, size=n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
