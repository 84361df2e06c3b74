"""Quadratic relations between the conserved charges.

For an integrable model the square of each charge closes on the family:

    R_i^2 = sum_{j != i} C[i,j] R_j + K[i] * I.

K[i] is the sum of squares of every parameter touching spin i. C[i,j] is
pinned by either of two formulas, which coincide whenever both apply:

  coupling route:  C[i,j] = -2 coupling[i,j,b] coupling[i,j,c] / coupling[j,i,a]
                   with (b, c) the axes complementary to the denominator axis a;
  field route:     C[i,j] = 2 field[i,a] coupling[i,j,a] / field[j,a].

This module derives (C, K), cross-checks every applicable variant of both
formulas plus the pair-closure condition

    C[i,k] coupling[k,k',a] + C[i,k'] coupling[k',k,a]
        = 2 coupling[i,k,a] coupling[i,k',a]

for all distinct triples, and verifies the operator identity itself by
brute-force matrix arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp

from .errors import (
    DegenerateCoupling,
    DimensionCapExceeded,
    IntegrabilityViolation,
    InternalInconsistency,
)
from .model import ModelSpec, build_all_charges, check_integrability_algebraic
from .pauli_ops import AXES, DEFAULT_CAP, frobenius_norm

#: provenance tags for C entries
ROUTE_COUPLING = "coupling"
ROUTE_FIELD = "field"
ROUTE_ZERO = "zero"

_OTHER_AXES = {a: tuple(b for b in AXES if b != a) for a in AXES}


@dataclass(frozen=True)
class QuadraticSystem:
    """Coefficients C (zero diagonal) and constants K of the closure relations."""

    C: np.ndarray
    K: np.ndarray
    provenance: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        c = np.asarray(self.C, dtype=float)
        k = np.asarray(self.K, dtype=float)
        n = k.shape[0]
        if c.shape != (n, n):
            raise ValueError(f"C must be ({n}, {n}), got {c.shape}")
        if np.any(np.diag(c) != 0.0):
            raise ValueError("C diagonal must be zero")
        if np.any(k < 0.0):
            raise ValueError("K entries are sums of squares and cannot be negative")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(k))):
            raise ValueError("C and K must be finite")
        c.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "K", k)

    @property
    def n(self) -> int:
        return self.K.shape[0]


@dataclass
class ConsistencyReport:
    """Mutual agreement of all coefficient formulas, plus pair closure."""

    tol: float
    max_route_residual: float = 0.0
    max_pair_residual: float = 0.0
    violations: list[tuple] = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass
class OperatorIdentityReport:
    """Relative Frobenius residual of the closure identity, per charge."""

    residuals: np.ndarray
    tol: float

    @property
    def ok(self) -> bool:
        return bool(np.all(self.residuals <= self.tol))


def _denominator_cutoff(spec: ModelSpec, tol: float) -> float:
    # scale-free cutoff below which a denominator is treated as zero
    return tol * (1.0 + spec.max_coupling())


def _coupling_route_value(spec: ModelSpec, i: int, j: int, a: int) -> float:
    b, c = _OTHER_AXES[a]
    return -2.0 * spec.coupling[i, j, b] * spec.coupling[i, j, c] / spec.coupling[j, i, a]


def _field_route_value(spec: ModelSpec, i: int, j: int, a: int) -> float:
    return 2.0 * spec.field[i, a] * spec.coupling[i, j, a] / spec.field[j, a]


def derive_coefficients(spec: ModelSpec, tol: float) -> QuadraticSystem:
    """Derive (C, K) from an integrable model.

    Refuses non-integrable input. Per pair the coupling route is preferred
    (it works for zero-field models); the field route is the fallback; a
    fully decoupled pair forces C[i,j] = 0. Within a route the largest valid
    denominator is used. When both routes apply they must agree within tol,
    otherwise the closure does not exist and InternalInconsistency is raised.
    """
    report = check_integrability_algebraic(spec, tol)
    if not report.ok:
        raise IntegrabilityViolation(
            f"model violates integrability constraints "
            f"(worst field residual {report.max_field_residual:.3e}, "
            f"worst triple residual {report.max_gaudin_residual:.3e} at tol {tol:.1e})",
            report=report,
        )
    n = spec.n
    cutoff = _denominator_cutoff(spec, tol)
    K = np.sum(spec.field**2, axis=1) + np.sum(spec.coupling**2, axis=(1, 2))
    C = np.zeros((n, n))
    provenance = [["" for _ in range(n)] for _ in range(n)]

    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            coupling_axes = [a for a in AXES if abs(spec.coupling[j, i, a]) > cutoff]
            field_axes = [
                a
                for a in AXES
                if abs(spec.field[j, a]) > cutoff and spec.coupling[i, j, a] != 0.0
            ]
            value = None
            if coupling_axes:
                best = max(coupling_axes, key=lambda a: abs(spec.coupling[j, i, a]))
                value = _coupling_route_value(spec, i, j, best)
                provenance[i][j] = ROUTE_COUPLING
            elif field_axes:
                best = max(field_axes, key=lambda a: abs(spec.field[j, a]))
                value = _field_route_value(spec, i, j, best)
                provenance[i][j] = ROUTE_FIELD
            elif np.all(spec.coupling[i, j, :] == 0.0):
                value = 0.0
                provenance[i][j] = ROUTE_ZERO
            else:
                raise DegenerateCoupling(
                    f"pair ({i}, {j}) is coupled but every denominator vanishes; "
                    f"its coefficient is undetermined"
                )
            # the closure pins C through every valid denominator, so every
            # applicable variant of either route must coincide
            variants = [_coupling_route_value(spec, i, j, a) for a in coupling_axes]
            variants += [
                _field_route_value(spec, i, j, a)
                for a in AXES
                if abs(spec.field[j, a]) > cutoff
            ]
            for alt in variants:
                spread = abs(value - alt) / max(1.0, abs(value), abs(alt))
                if spread > tol:
                    raise InternalInconsistency(
                        f"coefficient formulas disagree for pair ({i}, {j}): "
                        f"{value:.15g} vs {alt:.15g} (scaled spread {spread:.3e}); "
                        f"the charges commute but their squares do not close"
                    )
            C[i, j] = value

    return QuadraticSystem(C=C, K=K, provenance=tuple(tuple(row) for row in provenance))


def check_coefficient_consistency(
    spec: ModelSpec, qsys: QuadraticSystem, tol: float
) -> ConsistencyReport:
    """Compare every applicable variant of both routes against the derived C,
    and scan the pair-closure condition over all distinct (i, k, k') triples.
    """
    n = spec.n
    if qsys.n != n:
        raise ValueError("system size does not match model size")
    cutoff = _denominator_cutoff(spec, tol)
    rep = ConsistencyReport(tol=tol)

    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            candidates = []
            for a in AXES:
                if abs(spec.coupling[j, i, a]) > cutoff:
                    candidates.append(("coupling", a, _coupling_route_value(spec, i, j, a)))
                if abs(spec.field[j, a]) > cutoff:
                    candidates.append(("field", a, _field_route_value(spec, i, j, a)))
            for route, a, value in candidates:
                resid = abs(value - qsys.C[i, j]) / max(1.0, abs(value), abs(qsys.C[i, j]))
                if resid > rep.max_route_residual:
                    rep.max_route_residual = resid
                if resid > tol:
                    rep.violations.append(("route", route, (i, j), int(a), resid))

    cpl = spec.coupling
    for i in range(n):
        for k in range(n):
            if k == i:
                continue
            for kp in range(k + 1, n):
                if kp == i:
                    continue
                for a in AXES:
                    t1 = qsys.C[i, k] * cpl[k, kp, a]
                    t2 = qsys.C[i, kp] * cpl[kp, k, a]
                    t3 = 2.0 * cpl[i, k, a] * cpl[i, kp, a]
                    resid = abs(t1 + t2 - t3) / max(1.0, abs(t1), abs(t2), abs(t3))
                    if resid > rep.max_pair_residual:
                        rep.max_pair_residual = resid
                    if resid > tol:
                        rep.violations.append(("pair", (i, k, kp), int(a), resid))
    return rep


def verify_operator_identity(
    spec: ModelSpec,
    qsys: QuadraticSystem,
    tol: float = 1e-11,
    cap: int = DEFAULT_CAP,
) -> OperatorIdentityReport:
    """Brute-force check of R_i^2 = sum_j C[i,j] R_j + K[i] I for every i.

    Returns the relative Frobenius residual ||defect|| / ||R_i^2|| per charge.
    """
    if spec.dim > 2**cap:
        raise DimensionCapExceeded(
            f"operator identity check needs dim {spec.dim} > 2^{cap}"
        )
    if qsys.n != spec.n:
        raise ValueError("system size does not match model size")
    charges = build_all_charges(spec)
    eye = sp.identity(spec.dim, dtype=complex, format="csr")
    residuals = np.zeros(spec.n)
    for i in range(spec.n):
        square = charges[i] @ charges[i]
        defect = square - qsys.K[i] * eye
        for j in range(spec.n):
            if j != i and qsys.C[i, j] != 0.0:
                defect = defect - qsys.C[i, j] * charges[j]
        residuals[i] = frobenius_norm(defect) / frobenius_norm(square)
    return OperatorIdentityReport(residuals=residuals, tol=tol)
