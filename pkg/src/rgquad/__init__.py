"""Conserved charges, quadratic operator relations and eigenvalue-based
Bethe equations for spin-1/2 Richardson-Gaudin models."""

from .errors import (
    ConfigError,
    DegenerateCoupling,
    DimensionCapExceeded,
    IntegrabilityViolation,
    InternalInconsistency,
    NonCommutingFamily,
    RGQuadError,
    StartupDegenerate,
)
from .pauli_ops import (
    AXES,
    Axis,
    DEFAULT_CAP,
    anticommutator,
    commutator,
    embed_pair,
    embed_single,
    frobenius_norm,
    hermitian_eigendecomposition,
    identity_op,
    is_hermitian,
    pauli_2x2,
    trace,
)
from .model import (
    IntegrabilityReport,
    ModelSpec,
    build_charge,
    build_all_charges,
    check_commutators_numerical,
    check_integrability_algebraic,
    scale_coupling,
)
from .quad_relations import (
    ConsistencyReport,
    OperatorIdentityReport,
    QuadraticSystem,
    check_coefficient_consistency,
    derive_coefficients,
    verify_operator_identity,
)
from .bethe_solver import (
    EigenvalueTuple,
    NonConvergence,
    PathFailure,
    SolutionSet,
    SolverOptions,
    dedupe,
    newton_solve,
    residual_and_jacobian,
    solve_all_homotopy,
    solve_all_multistart,
    solve_auto,
    spectral_sum_rules,
)
from .ed_oracle import (
    MatchReport,
    SpectrumTable,
    energy_from_tuple,
    hamiltonian,
    joint_spectrum,
    match_spectra,
)
from .catalog import (
    FAMILIES,
    pip_double_sum,
    pip_shift,
    verify_shifted_relation_pip,
    verify_shifted_relation_xxx,
    xxx_rational,
    xxx_shift,
    xxx_telescopic_sum,
    xxz_pip,
    xxz_trigonometric,
)

__version__ = "0.1.0"
