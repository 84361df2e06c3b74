"""Operator kernel: Pauli matrices embedded on a chain of N spins-1/2.

Operators live on the full 2^N-dimensional space and are represented as
scipy CSR matrices (complex128). Site 0 is the leftmost, most-significant
tensor factor, so embeddings are I ⊗ ... ⊗ sigma ⊗ ... ⊗ I built with
sparse Kronecker products; no dense intermediate is ever materialized.
Dense work (eigendecomposition) is gated behind a configurable qubit cap.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg
from scipy.linalg import eigh

from .errors import DimensionCapExceeded

#: Largest N for which dense 2^N x 2^N work is allowed by default (4096 x 4096).
DEFAULT_CAP = 12


class Axis(IntEnum):
    """Spin-space direction, totally ordered X < Y < Z."""

    X = 0
    Y = 1
    Z = 2


AXES = (Axis.X, Axis.Y, Axis.Z)

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli_2x2(axis: Axis | int) -> np.ndarray:
    """Return a copy of the standard 2x2 Pauli matrix along `axis`."""
    return _PAULI[Axis(axis)].copy()


def identity_op(num_sites: int) -> sp.csr_matrix:
    """Identity operator on `num_sites` spins."""
    if num_sites < 0:
        raise ValueError(f"negative site count {num_sites}")
    return sp.identity(2**num_sites, dtype=complex, format="csr")


def _check_site(num_sites: int, site: int) -> None:
    if num_sites < 1:
        raise ValueError(f"need at least one spin, got {num_sites}")
    if not 0 <= site < num_sites:
        raise ValueError(f"site {site} out of range for {num_sites} spins")


def embed_single(num_sites: int, site: int, axis: Axis | int) -> sp.csr_matrix:
    """Pauli matrix along `axis` acting on `site`, identity elsewhere."""
    _check_site(num_sites, site)
    mat = sp.csr_matrix(_PAULI[Axis(axis)])
    left = sp.identity(2**site, dtype=complex, format="csr")
    right = sp.identity(2 ** (num_sites - site - 1), dtype=complex, format="csr")
    return sp.kron(sp.kron(left, mat), right, format="csr")


def embed_pair(num_sites: int, site_a: int, site_b: int, axis: Axis | int) -> sp.csr_matrix:
    """Product of same-axis Pauli matrices on two distinct sites."""
    if site_a == site_b:
        raise ValueError(f"pair sites must be distinct, got {site_a} twice")
    _check_site(num_sites, site_a)
    _check_site(num_sites, site_b)
    return embed_single(num_sites, site_a, axis) @ embed_single(num_sites, site_b, axis)


def _check_same_dim(a, b) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def commutator(a, b):
    """A B - B A."""
    _check_same_dim(a, b)
    return a @ b - b @ a


def anticommutator(a, b):
    """A B + B A."""
    _check_same_dim(a, b)
    return a @ b + b @ a


def frobenius_norm(a) -> float:
    """Entry-wise 2-norm, for sparse or dense operators."""
    if sp.issparse(a):
        return float(sp.linalg.norm(a, "fro"))
    return float(np.linalg.norm(a, "fro"))


def trace(a) -> complex:
    """Sum of the diagonal."""
    if sp.issparse(a):
        return complex(a.diagonal().sum())
    return complex(np.trace(a))


def hermiticity_defect(a) -> float:
    """Frobenius norm of A - A^dagger."""
    return frobenius_norm(a - a.conj().T)


def is_hermitian(a, tol: float = 1e-10) -> bool:
    """True when ||A - A^dagger||_F <= tol * max(1, ||A||_F)."""
    return hermiticity_defect(a) <= tol * max(1.0, frobenius_norm(a))


def hermitian_eigendecomposition(
    a,
    cap: int = DEFAULT_CAP,
    hermiticity_tol: float = 1e-10,
) -> tuple[np.ndarray, np.ndarray]:
    """Dense eigendecomposition of a Hermitian operator.

    Returns (eigenvalues ascending, eigenvector columns). The input may be
    sparse or dense; it is densified, so the dimension must not exceed 2^cap.
    """
    dim = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got {a.shape}")
    if dim > 2**cap:
        raise DimensionCapExceeded(
            f"dimension {dim} exceeds dense cap 2^{cap}; raise the cap to proceed"
        )
    if not is_hermitian(a, hermiticity_tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    dense = a.toarray() if sp.issparse(a) else np.asarray(a)
    evals, evecs = eigh(dense)
    return evals, evecs
