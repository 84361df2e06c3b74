"""Root finding for the coupled quadratic eigenvalue equations.

Each joint eigenvalue tuple r = (r_1, ..., r_N) of the commuting charges
solves

    F_i(r) = r_i^2 - sum_{j != i} C[i,j] r_j - K[i] = 0.

The primary strategy is homotopy continuation along the coupling scale: at
scale 0 the equations decouple to r_i^2 = |field_i|^2 with the 2^N explicit
sign solutions, and scaling the couplings keeps the model integrable, so the
whole path consists of genuine systems of the same form. All 2^N branches
are advanced together as a front (Euler predictor, Newton corrector); the
step size is controlled by each walker's corrector error measured against
its distance to the nearest other walker, which resolves the avoided
crossings where independent trackers jump between branches. A seeded
multi-start Newton solver serves as the fallback when some field magnitude
is too small to separate the startup branches.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import StartupDegenerate
from .model import ModelSpec
from .quad_relations import QuadraticSystem, derive_coefficients


@dataclass(frozen=True)
class EigenvalueTuple:
    """One solution of the quadratic system: joint eigenvalues of all charges."""

    r: np.ndarray
    residual_norm: float
    branch_tag: tuple[int, ...] | None = None

    def __post_init__(self):
        arr = np.asarray(self.r, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "r", arr)


@dataclass(frozen=True)
class NonConvergence:
    """Best iterate of a Newton run that did not reach tolerance."""

    r: np.ndarray
    residual_norm: float
    cause: str  # "singular_jacobian" | "line_search_stalled" | "max_iter"
    iterations: int


@dataclass(frozen=True)
class PathFailure:
    """A homotopy branch abandoned before reaching the target coupling scale."""

    branch_tag: tuple[int, ...]
    reached: float
    cause: str


@dataclass
class SolutionSet:
    """Deduplicated solutions, sorted lexicographically by tuple entries."""

    tuples: list[EigenvalueTuple]
    dedupe_tol: float
    expected: int
    seed: int | None = None
    path_failures: list[PathFailure] = dc_field(default_factory=list)

    @property
    def found(self) -> int:
        return len(self.tuples)

    @property
    def complete(self) -> bool:
        return self.found == self.expected

    def as_array(self) -> np.ndarray:
        if not self.tuples:
            return np.zeros((0, 0))
        return np.array([t.r for t in self.tuples])


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for Newton, the homotopy front tracker and the multi-start fallback."""

    tol: float = 1e-12  # convergence threshold on ||F||_2
    max_iter: int = 100
    max_halvings: int = 30
    condition_limit: float = 1e14
    integrability_tol: float = 1e-10
    startup_threshold: float = 1e-8  # relative to 1 + max coupling
    initial_step: float = 0.05
    min_step: float = 1e-6
    max_step: float = 0.25
    step_growth: float = 2.0
    corrector_iters: int = 25  # per front step, without damping
    separation_fraction: float = 0.25  # corrector error vs nearest-walker gap
    sample_count: int | None = None  # multistart; default 200 * 2^N
    seed: int | None = None
    dedupe_tol: float | None = None  # default 1e-7 * (1 + max sqrt(K))


def residual_and_jacobian(
    qsys: QuadraticSystem, r: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """F(r) and its analytic Jacobian: J_ii = 2 r_i, J_ij = -C[i,j]."""
    r = np.asarray(r, dtype=float)
    if r.shape != (qsys.n,):
        raise ValueError(f"point must have length {qsys.n}, got {r.shape}")
    F = r * r - qsys.C @ r - qsys.K
    J = -qsys.C.copy()
    J[np.diag_indices(qsys.n)] = 2.0 * r
    return F, J


def newton_solve(
    qsys: QuadraticSystem,
    r0: np.ndarray,
    opts: SolverOptions | None = None,
) -> EigenvalueTuple | NonConvergence:
    """Damped Newton iteration from r0.

    Steps are halved until the residual norm decreases; a Jacobian whose
    condition estimate exceeds the limit aborts with a singular-Jacobian
    report carrying the best iterate seen.
    """
    opts = opts or SolverOptions()
    r = np.asarray(r0, dtype=float).copy()
    F, J = residual_and_jacobian(qsys, r)
    norm = float(np.linalg.norm(F))
    best_r, best_norm = r.copy(), norm
    for iteration in range(opts.max_iter):
        if norm <= opts.tol:
            return EigenvalueTuple(r=r, residual_norm=norm)
        if np.linalg.cond(J) > opts.condition_limit:
            return NonConvergence(best_r, best_norm, "singular_jacobian", iteration)
        step = np.linalg.solve(J, -F)
        damping = 1.0
        for _ in range(opts.max_halvings):
            trial = r + damping * step
            trial_norm = float(np.linalg.norm(residual_and_jacobian(qsys, trial)[0]))
            if trial_norm < norm:
                break
            damping *= 0.5
        else:
            return NonConvergence(best_r, best_norm, "line_search_stalled", iteration)
        r = r + damping * step
        F, J = residual_and_jacobian(qsys, r)
        norm = float(np.linalg.norm(F))
        if norm < best_norm:
            best_r, best_norm = r.copy(), norm
    if norm <= opts.tol:
        return EigenvalueTuple(r=r, residual_norm=norm)
    return NonConvergence(best_r, best_norm, "max_iter", opts.max_iter)


def dedupe(
    tuples: list[EigenvalueTuple], tol: float, expected: int | None = None
) -> SolutionSet:
    """Greedy max-norm clustering; each cluster keeps its lowest-residual member."""
    if tol <= 0:
        raise ValueError("dedupe tolerance must be positive")
    if expected is None:
        expected = 2 ** len(tuples[0].r) if tuples else 0
    kept: list[EigenvalueTuple] = []
    for cand in sorted(tuples, key=lambda t: t.residual_norm):
        if all(np.max(np.abs(cand.r - k.r)) > tol for k in kept):
            kept.append(cand)
    kept.sort(key=lambda t: tuple(t.r))
    return SolutionSet(tuples=kept, dedupe_tol=tol, expected=expected)


def _default_dedupe_tol(qsys: QuadraticSystem) -> float:
    return 1e-7 * (1.0 + float(np.max(np.sqrt(qsys.K))))


# ---------------------------------------------------------------------------
# homotopy front tracking


def _front_residual(C: np.ndarray, K: np.ndarray, R: np.ndarray) -> np.ndarray:
    return R * R - R @ C.T - K[None, :]


def _front_jacobians(C: np.ndarray, R: np.ndarray) -> np.ndarray:
    m, n = R.shape
    J = np.broadcast_to(-C, (m, n, n)).copy()
    J[:, np.arange(n), np.arange(n)] = 2.0 * R
    return J


def _batched_solve(J: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve J[b] x[b] = rhs[b] for every walker; singular members get a
    zero step and are flagged instead of aborting the batch."""
    try:
        return np.linalg.solve(J, rhs[:, :, None])[:, :, 0], np.ones(len(J), dtype=bool)
    except np.linalg.LinAlgError:
        steps = np.zeros_like(rhs)
        ok = np.ones(len(J), dtype=bool)
        for b in range(len(J)):
            try:
                steps[b] = np.linalg.solve(J[b], rhs[b])
            except np.linalg.LinAlgError:
                ok[b] = False
        return steps, ok


def _front_newton(
    C: np.ndarray, K: np.ndarray, R0: np.ndarray, tol: float, max_iter: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Undamped Newton on every walker at a fixed coupling scale.

    Walkers start from predictor output, so plain steps converge in a few
    iterations; anything that diverges or stalls is reported unconverged and
    handled by the front's step control.
    """
    R = R0.copy()
    F = _front_residual(C, K, R)
    norms = np.linalg.norm(F, axis=1)
    converged = norms <= tol
    healthy = np.isfinite(norms)
    for _ in range(max_iter):
        active = healthy & ~converged
        if not np.any(active):
            break
        J = _front_jacobians(C, R[active])
        steps, solvable = _batched_solve(J, -F[active])
        idx = np.flatnonzero(active)
        healthy[idx[~solvable]] = False
        R[idx[solvable]] += steps[solvable]
        F[active] = _front_residual(C, K, R[active])
        norms[active] = np.linalg.norm(F[active], axis=1)
        healthy &= np.isfinite(norms)
        converged = healthy & (norms <= tol)
    return R, norms, converged


def _nearest_gaps(R: np.ndarray) -> np.ndarray:
    """Max-norm distance from each walker to its nearest distinct walker."""
    if R.shape[0] == 1:
        return np.full(1, np.inf)
    dist = np.max(np.abs(R[:, None, :] - R[None, :, :]), axis=2)
    np.fill_diagonal(dist, np.inf)
    return dist.min(axis=1)


def solve_all_homotopy(
    spec: ModelSpec,
    opts: SolverOptions | None = None,
    qsys: QuadraticSystem | None = None,
) -> SolutionSet:
    """Track all 2^N branches from the decoupled limit to the full coupling.

    Requires every field magnitude to clear the startup threshold so the
    sign branches are separated at scale zero. The front advances at a
    shared coupling scale; a step is accepted only when every walker's
    corrector error stays below a fraction of its distance to the nearest
    other walker, so paths cannot silently swap or merge at avoided
    crossings. Walkers that cannot advance even at the minimum step are
    dropped and recorded, never silently lost.
    """
    opts = opts or SolverOptions()
    if qsys is None:
        qsys = derive_coefficients(spec, opts.integrability_tol)
    n = spec.n
    field_norms = np.linalg.norm(spec.field, axis=1)
    threshold = opts.startup_threshold * (1.0 + spec.max_coupling())
    if np.any(field_norms <= threshold):
        weak = int(np.argmin(field_norms))
        raise StartupDegenerate(
            f"|field| = {field_norms[weak]:.3e} on spin {weak} is below the startup "
            f"threshold {threshold:.3e}; branches collide at zero coupling "
            f"(use the multi-start solver or add a small generic tilt field)"
        )
    field_sq = np.sum(spec.field**2, axis=1)
    coupling_sq = np.sum(spec.coupling**2, axis=(1, 2))
    base_C = qsys.C

    tags = list(itertools.product((1, -1), repeat=n))
    R = np.array([np.array(t, dtype=float) * field_norms for t in tags])
    active = np.ones(len(tags), dtype=bool)
    failures: list[PathFailure] = []
    lam, step = 0.0, opts.initial_step
    scale = 1.0 + float(np.max(np.abs(R)))
    dedupe_tol = (
        opts.dedupe_tol if opts.dedupe_tol is not None else _default_dedupe_tol(qsys)
    )
    # walkers closer than this after a step have landed on the same root
    merge_tol = dedupe_tol

    while lam < 1.0 - 1e-12 and np.any(active):
        gaps = np.full(len(tags), np.inf)
        gaps[active] = _nearest_gaps(R[active])
        error_bounds = np.maximum(opts.separation_fraction * gaps, 1e-9 * scale)

        # Euler predictor at the current scale, batched over walkers
        J = _front_jacobians(lam * base_C, R[active])
        rhs = R[active] @ base_C.T + 2.0 * lam * coupling_sq[None, :]
        velocity, solvable = _batched_solve(J, rhs)
        velocity[~solvable] = 0.0

        while True:
            dlam = min(step, 1.0 - lam)
            target = lam + dlam
            predicted = R[active] + dlam * velocity
            corrected, norms, converged = _front_newton(
                target * base_C,
                field_sq + target**2 * coupling_sq,
                predicted,
                opts.tol,
                opts.corrector_iters,
            )
            error = np.max(np.abs(corrected - predicted), axis=1)
            ok = converged & (error <= error_bounds[active])
            # two walkers landing on the same root means one of them jumped;
            # that cannot be detected per walker, only pairwise
            collided = _nearest_gaps(corrected) <= merge_tol
            if np.all(ok) and not np.any(collided):
                R[active] = corrected
                lam = target
                step = min(step * opts.step_growth, opts.max_step)
                break
            if dlam / 2.0 >= opts.min_step:
                step = dlam / 2.0
                continue
            # cannot refine further: keep the walkers that did pass, drop
            # and record the rest; of each collided cluster one walker
            # survives to carry the shared root forward
            idx = np.flatnonzero(active)
            seen: list[int] = []
            for local, walker in enumerate(idx):
                drop_cause = None
                if not converged[local]:
                    drop_cause = "corrector_failed"
                elif not ok[local]:
                    drop_cause = "unresolved_pinch"
                elif collided[local] and any(
                    np.max(np.abs(corrected[local] - corrected[other])) <= merge_tol
                    for other in seen
                ):
                    drop_cause = "merged_path"
                if drop_cause is None:
                    R[walker] = corrected[local]
                    seen.append(local)
                else:
                    failures.append(PathFailure(tags[walker], lam, drop_cause))
                    active[walker] = False
            lam = target
            step = opts.min_step * opts.step_growth
            break

    found: list[EigenvalueTuple] = []
    for walker in np.flatnonzero(active):
        # polish on the exact target system so float accumulation of the
        # scale cannot leave the residual above tolerance
        result = newton_solve(qsys, R[walker], opts)
        if isinstance(result, EigenvalueTuple):
            found.append(
                EigenvalueTuple(
                    r=result.r,
                    residual_norm=result.residual_norm,
                    branch_tag=tags[walker],
                )
            )
        else:
            failures.append(PathFailure(tags[walker], lam, f"final_polish:{result.cause}"))

    solution = dedupe(found, dedupe_tol, expected=2**n)
    solution.path_failures = failures
    solution.seed = opts.seed
    return solution


def solve_all_multistart(
    qsys: QuadraticSystem, opts: SolverOptions | None = None
) -> SolutionSet:
    """Newton from seeded random samples inside a coarse root bound.

    The per-coordinate bound |r_i| <= sqrt(K_i) + sum_j |C[i,j]| contains
    every real root. Incomplete sets are reported, never hidden.
    """
    opts = opts or SolverOptions()
    n = qsys.n
    seed = opts.seed if opts.seed is not None else 0
    rng = np.random.default_rng(seed)
    count = opts.sample_count if opts.sample_count is not None else 200 * 2**n
    bound = np.sqrt(qsys.K) + np.sum(np.abs(qsys.C), axis=1)
    found: list[EigenvalueTuple] = []
    for _ in range(count):
        start = rng.uniform(-bound, bound)
        result = newton_solve(qsys, start, opts)
        if isinstance(result, EigenvalueTuple):
            found.append(result)
    tol = opts.dedupe_tol if opts.dedupe_tol is not None else _default_dedupe_tol(qsys)
    solution = dedupe(found, tol, expected=2**n)
    solution.seed = seed
    return solution


def solve_auto(
    spec: ModelSpec,
    opts: SolverOptions | None = None,
    qsys: QuadraticSystem | None = None,
) -> SolutionSet:
    """Homotopy when the startup is sound, multi-start otherwise."""
    opts = opts or SolverOptions()
    if qsys is None:
        qsys = derive_coefficients(spec, opts.integrability_tol)
    try:
        return solve_all_homotopy(spec, opts, qsys=qsys)
    except StartupDegenerate:
        return solve_all_multistart(qsys, opts)


def spectral_sum_rules(
    solution: SolutionSet, qsys: QuadraticSystem
) -> tuple[np.ndarray, np.ndarray]:
    """Scaled defects of the two trace identities on a complete solution set.

    Over the full joint spectrum, sum r_i = 0 (charges are traceless) and
    sum r_i^2 = 2^N K_i (trace of the closure identity). Returns both defect
    vectors, each normalized by 2^N times the relevant magnitude scale.
    """
    if not solution.complete:
        raise ValueError(
            f"sum rules apply to complete sets only "
            f"({solution.found} of {solution.expected} tuples found)"
        )
    arr = solution.as_array()
    count = arr.shape[0]
    linear = np.abs(arr.sum(axis=0)) / (count * np.maximum(1.0, np.abs(arr).max(axis=0)))
    quadratic = np.abs((arr**2).sum(axis=0) - count * qsys.K) / (
        count * np.maximum(1.0, qsys.K)
    )
    return linear, quadratic
