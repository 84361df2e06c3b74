"""Brute-force ground truth for the joint spectrum of the commuting charges.

A random real combination of the charges is diagonalized densely; each
eigenvector then yields one joint eigenvalue tuple via expectation values,
verified state by state against the raw matrices. Degenerate combinations
are retried with fresh coefficients, and as a last resort the degenerate
blocks are split by diagonalizing the charges one after another inside each
block. The oracle consumes nothing but the model itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh

from .errors import NonCommutingFamily
from .model import ModelSpec, build_all_charges, check_commutators_numerical
from .pauli_ops import DEFAULT_CAP, frobenius_norm


@dataclass
class SpectrumTable:
    """Joint spectrum from exact diagonalization: one row per basis state."""

    tuples: np.ndarray  # (2^N, N)
    diag_residual: float  # worst ||R_i v - r v||_2 over states and charges
    combo_seed: int
    unresolved_blocks: list[int] = dc_field(default_factory=list)  # leftover multiplicities


@dataclass
class MatchReport:
    """Injective greedy pairing between solver tuples and oracle tuples."""

    pairs: list[tuple[int, int, float]]  # (solver index, oracle index, max-norm distance)
    unmatched_solver: list[int]
    unmatched_oracle: list[int]
    max_distance: float

    @property
    def complete(self) -> bool:
        return not self.unmatched_solver and not self.unmatched_oracle


def hamiltonian(spec: ModelSpec, combo: np.ndarray) -> sp.csr_matrix:
    """Real linear combination of the charges, sum_i combo[i] R_i."""
    combo = np.asarray(combo, dtype=float)
    if combo.shape != (spec.n,):
        raise ValueError(f"combination must have length {spec.n}, got {combo.shape}")
    charges = build_all_charges(spec)
    total = sp.csr_matrix((spec.dim, spec.dim), dtype=complex)
    for c, r in zip(combo, charges):
        if c != 0.0:
            total = total + c * r
    return total.tocsr()


def energy_from_tuple(combo: np.ndarray, r: np.ndarray) -> float:
    """Energy of the combination Hamiltonian on a joint eigenvalue tuple."""
    combo = np.asarray(combo, dtype=float)
    r = np.asarray(r, dtype=float)
    if combo.shape != r.shape:
        raise ValueError(f"length mismatch: {combo.shape} vs {r.shape}")
    return float(np.dot(combo, r))


def _split_blocks(values: np.ndarray, gap: float) -> list[np.ndarray]:
    """Group sorted eigenvalue indices into clusters closer than `gap`."""
    blocks = []
    start = 0
    for idx in range(1, values.size + 1):
        if idx == values.size or values[idx] - values[idx - 1] > gap:
            blocks.append(np.arange(start, idx))
            start = idx
    return blocks


def _refine_block(
    vectors: np.ndarray, charges_dense: list[np.ndarray], level: int, gap_rel: float
) -> tuple[np.ndarray, list[int]]:
    """Split a degenerate block by the remaining charges, one at a time."""
    if vectors.shape[1] == 1 or level == len(charges_dense):
        leftover = [vectors.shape[1]] if vectors.shape[1] > 1 else []
        return vectors, leftover
    sub = vectors.conj().T @ charges_dense[level] @ vectors
    sub = 0.5 * (sub + sub.conj().T)
    evals, rot = eigh(sub)
    rotated = vectors @ rot
    gap = gap_rel * max(1.0, float(np.max(np.abs(evals))))
    leftovers: list[int] = []
    for block in _split_blocks(evals, gap):
        if block.size > 1:
            refined, left = _refine_block(
                rotated[:, block], charges_dense, level + 1, gap_rel
            )
            rotated[:, block] = refined
            leftovers.extend(left)
    return rotated, leftovers


def _expectations(
    vectors: np.ndarray, charges_dense: list[np.ndarray]
) -> tuple[np.ndarray, float]:
    """Per-state expectation values of every charge and the worst residual."""
    tuples = np.empty((vectors.shape[1], len(charges_dense)))
    worst = 0.0
    for i, mat in enumerate(charges_dense):
        applied = mat @ vectors
        expect = np.real(np.einsum("jk,jk->k", vectors.conj(), applied))
        tuples[:, i] = expect
        defect = applied - vectors * expect[None, :]
        worst = max(worst, float(np.max(np.linalg.norm(defect, axis=0))))
    return tuples, worst


def joint_spectrum(
    spec: ModelSpec,
    seed: int = 0,
    state_tol: float | None = None,
    commutator_tol: float = 1e-10,
    cap: int = DEFAULT_CAP,
    max_redraws: int = 5,
    degeneracy_gap: float = 1e-9,
) -> SpectrumTable:
    """Joint eigenvalue tuples of all charges, by dense diagonalization.

    Raises NonCommutingFamily when the commutator test fails, since joint
    eigenvalues would be meaningless. Combination draws whose spectrum is
    degenerate (or fails the per-state residual check) are retried; after
    the retries run out the degenerate blocks of the last draw are split
    charge by charge, and any multiplicity no charge can split is recorded,
    not raised.
    """
    comm = check_commutators_numerical(spec, commutator_tol, cap=cap)
    if not comm.ok:
        raise NonCommutingFamily(
            f"charges do not commute (worst norm {comm.max_commutator_norm:.3e}, "
            f"scale {comm.commutator_scale:.3e}); joint spectrum is undefined"
        )
    charges = build_all_charges(spec)
    charges_dense = [r.toarray() for r in charges]
    if state_tol is None:
        state_tol = 1e-9 * (1.0 + max(frobenius_norm(r) for r in charges))
    rng = np.random.default_rng(seed)

    last = None
    for _ in range(max_redraws + 1):
        combo = rng.standard_normal(spec.n)
        dense = sum(c * m for c, m in zip(combo, charges_dense))
        evals, vecs = eigh(dense)
        gap = degeneracy_gap * max(1.0, float(np.max(np.abs(evals))))
        blocks = _split_blocks(evals, gap)
        last = (vecs, blocks)
        if all(b.size == 1 for b in blocks):
            tuples, worst = _expectations(vecs, charges_dense)
            if worst <= state_tol:
                return SpectrumTable(
                    tuples=tuples, diag_residual=worst, combo_seed=seed
                )

    # every generic draw failed: split the last draw's blocks charge by charge
    vectors, blocks = last
    unresolved: list[int] = []
    for block in blocks:
        if block.size > 1:
            refined, left = _refine_block(
                vectors[:, block], charges_dense, 0, degeneracy_gap
            )
            vectors[:, block] = refined
            unresolved.extend(left)
    tuples, worst = _expectations(vectors, charges_dense)
    if worst > state_tol:
        raise NonCommutingFamily(
            f"per-state residual {worst:.3e} exceeds {state_tol:.3e} even after "
            f"block refinement; simultaneous diagonalization broke down"
        )
    return SpectrumTable(
        tuples=tuples,
        diag_residual=worst,
        combo_seed=seed,
        unresolved_blocks=unresolved,
    )


def match_spectra(solver, oracle, tol: float) -> MatchReport:
    """Greedy globally-nearest pairing in max-norm, injective on both sides.

    Accepts a SolutionSet / SpectrumTable or plain (M, N) arrays. Pairs are
    accepted in order of increasing distance, so every accepted pair is
    mutually nearest among the tuples still unmatched; anything farther
    than tol stays unmatched and is reported.
    """
    a = solver.as_array() if hasattr(solver, "as_array") else solver
    b = oracle.tuples if hasattr(oracle, "tuples") else oracle
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or (a.size and b.size and a.shape[1] != b.shape[1]):
        raise ValueError("tuple arrays must be 2-d with equal row length")
    if a.size == 0 or b.size == 0:
        return MatchReport(
            pairs=[],
            unmatched_solver=list(range(a.shape[0])),
            unmatched_oracle=list(range(b.shape[0])),
            max_distance=0.0,
        )
    dist = np.max(np.abs(a[:, None, :] - b[None, :, :]), axis=2)
    order = np.argsort(dist, axis=None, kind="stable")
    used_a = np.zeros(a.shape[0], dtype=bool)
    used_b = np.zeros(b.shape[0], dtype=bool)
    pairs: list[tuple[int, int, float]] = []
    for flat in order:
        ia, ib = divmod(int(flat), b.shape[0])
        d = float(dist[ia, ib])
        if d > tol:
            break
        if used_a[ia] or used_b[ib]:
            continue
        used_a[ia] = used_b[ib] = True
        pairs.append((ia, ib, d))
    return MatchReport(
        pairs=pairs,
        unmatched_solver=[int(i) for i in np.flatnonzero(~used_a)],
        unmatched_oracle=[int(i) for i in np.flatnonzero(~used_b)],
        max_distance=max((p[2] for p in pairs), default=0.0),
    )
