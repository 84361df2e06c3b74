"""Model definition and integrability certification.

A model of N spins-1/2 is fixed by a local field 3-vector per spin and a
same-axis two-spin coupling tensor. Its conserved charge attached to spin i
is

    R_i = sum_a field[i,a] sigma_i^a
        + sum_{k != i} sum_a coupling[i,k,a] sigma_i^a sigma_k^a.

The family is integrable (all charges commute) exactly when two algebraic
constraint families hold for every axis permutation (a, b, c):

    field[i,c] coupling[j,i,b] + field[j,c] coupling[i,j,a] = 0        (pairs)
    coupling[i,k,a] coupling[j,k,b] - coupling[i,k,c] coupling[j,i,b]
        - coupling[i,j,a] coupling[j,k,c] = 0                          (triples)

Both are checked here, as is the brute-force commutator test they imply.
Couplings are NOT assumed antisymmetric under i <-> j.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp

from . import pauli_ops
from .errors import DimensionCapExceeded
from .pauli_ops import DEFAULT_CAP, AXES, commutator, frobenius_norm

#: All 6 orderings of (X, Y, Z), fixed once for the constraint scans.
AXIS_PERMUTATIONS = tuple(itertools.permutations(AXES))


def _as_real_array(value, name: str) -> np.ndarray:
    arr = np.asarray(value)
    if np.iscomplexobj(arr):
        raise ValueError(f"{name} must be real; complex entries are rejected")
    arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of one model: per-spin fields and same-axis couplings.

    field: (N, 3) array, field[i, a] = field on spin i along axis a.
    coupling: (N, N, 3) array, coupling[i, j, a] = strength of the
        sigma_i^a sigma_j^a term in the charge of spin i. The diagonal
        i == j is unused and must be zero. Antisymmetry is not required.
    """

    field: np.ndarray
    coupling: np.ndarray

    def __post_init__(self):
        fld = _as_real_array(self.field, "field")
        cpl = _as_real_array(self.coupling, "coupling")
        if fld.ndim != 2 or fld.shape[1] != 3:
            raise ValueError(f"field must have shape (N, 3), got {fld.shape}")
        n = fld.shape[0]
        if n < 1:
            raise ValueError("need at least one spin")
        if cpl.shape != (n, n, 3):
            raise ValueError(
                f"coupling must have shape ({n}, {n}, 3), got {cpl.shape}"
            )
        diag = cpl[np.arange(n), np.arange(n), :]
        if np.any(diag != 0.0):
            raise ValueError("coupling diagonal entries must be zero")
        fld.setflags(write=False)
        cpl.setflags(write=False)
        object.__setattr__(self, "field", fld)
        object.__setattr__(self, "coupling", cpl)

    @property
    def n(self) -> int:
        return self.field.shape[0]

    @property
    def dim(self) -> int:
        return 2**self.n

    def max_coupling(self) -> float:
        return float(np.max(np.abs(self.coupling))) if self.n > 1 else 0.0


@dataclass(frozen=True)
class Violation:
    """One constraint equation whose scaled residual exceeded tolerance."""

    kind: str  # "field", "gaudin" or "commutator"
    sites: tuple[int, ...]
    axes: tuple[int, ...] | None
    residual: float


@dataclass
class IntegrabilityReport:
    """Worst residuals of the constraint scan and/or commutator test.

    Algebraic residuals are scaled by max(1, largest participating term) so
    the tolerance is meaningful across coupling magnitudes. The commutator
    norm is raw; its pass criterion is tol * commutator_scale with
    commutator_scale = max(1, max_i ||R_i||_F^2).
    """

    tol: float
    max_field_residual: float | None = None
    max_gaudin_residual: float | None = None
    max_commutator_norm: float | None = None
    commutator_scale: float | None = None
    violations: list[Violation] = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def build_charge(spec: ModelSpec, i: int) -> sp.csr_matrix:
    """Conserved charge attached to spin i, as a sparse operator."""
    n = spec.n
    if not 0 <= i < n:
        raise ValueError(f"spin index {i} out of range for {n} spins")
    charge = sp.csr_matrix((spec.dim, spec.dim), dtype=complex)
    for a in AXES:
        if spec.field[i, a] != 0.0:
            charge = charge + spec.field[i, a] * pauli_ops.embed_single(n, i, a)
        for k in range(n):
            if k != i and spec.coupling[i, k, a] != 0.0:
                charge = charge + spec.coupling[i, k, a] * pauli_ops.embed_pair(n, i, k, a)
    return charge.tocsr()


def build_all_charges(spec: ModelSpec) -> list[sp.csr_matrix]:
    return [build_charge(spec, i) for i in range(spec.n)]


def check_integrability_algebraic(spec: ModelSpec, tol: float) -> IntegrabilityReport:
    """Scan both constraint families over all index tuples and axis orderings.

    Redundant orderings are scanned on purpose; the extra cost is negligible
    and catches sign errors in either family.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    fld, cpl, n = spec.field, spec.coupling, spec.n
    report = IntegrabilityReport(tol=tol, max_field_residual=0.0, max_gaudin_residual=0.0)
    for a, b, c in AXIS_PERMUTATIONS:
        for i in range(n):
            for j in range(n):
                if j == i:
                    continue
                t1 = fld[i, c] * cpl[j, i, b]
                t2 = fld[j, c] * cpl[i, j, a]
                resid = abs(t1 + t2) / max(1.0, abs(t1), abs(t2))
                if resid > report.max_field_residual:
                    report.max_field_residual = resid
                if resid > tol:
                    report.violations.append(Violation("field", (i, j), (a, b, c), resid))
                for k in range(n):
                    if k == i or k == j:
                        continue
                    u1 = cpl[i, k, a] * cpl[j, k, b]
                    u2 = cpl[i, k, c] * cpl[j, i, b]
                    u3 = cpl[i, j, a] * cpl[j, k, c]
                    resid = abs(u1 - u2 - u3) / max(1.0, abs(u1), abs(u2), abs(u3))
                    if resid > report.max_gaudin_residual:
                        report.max_gaudin_residual = resid
                    if resid > tol:
                        report.violations.append(
                            Violation("gaudin", (i, j, k), (a, b, c), resid)
                        )
    return report


def check_commutators_numerical(
    spec: ModelSpec, tol: float, cap: int = DEFAULT_CAP
) -> IntegrabilityReport:
    """Brute-force test: Frobenius norm of every charge pair commutator."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if spec.dim > 2**cap:
        raise DimensionCapExceeded(
            f"commutator check needs dense-scale work at dim {spec.dim} > 2^{cap}"
        )
    charges = build_all_charges(spec)
    scale = max(1.0, max(frobenius_norm(r) for r in charges) ** 2)
    report = IntegrabilityReport(tol=tol, max_commutator_norm=0.0, commutator_scale=scale)
    for i in range(spec.n):
        for j in range(i + 1, spec.n):
            norm = frobenius_norm(commutator(charges[i], charges[j]))
            if norm > report.max_commutator_norm:
                report.max_commutator_norm = norm
            if norm > tol * scale:
                report.violations.append(Violation("commutator", (i, j), None, norm))
    return report


def scale_coupling(spec: ModelSpec, lam: float) -> ModelSpec:
    """Multiply every coupling by `lam`, fields unchanged.

    Both constraint families are homogeneous in the couplings (degree 1 and
    degree 2), so this maps integrable models to integrable models.
    """
    if not np.isfinite(lam):
        raise ValueError("scale factor must be finite")
    return ModelSpec(field=spec.field.copy(), coupling=spec.coupling * lam)
