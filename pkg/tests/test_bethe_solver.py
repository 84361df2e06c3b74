import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rgquad import catalog
from rgquad.bethe_solver import (
    EigenvalueTuple,
    NonConvergence,
    SolverOptions,
    dedupe,
    newton_solve,
    residual_and_jacobian,
    solve_all_homotopy,
    solve_all_multistart,
    solve_auto,
    spectral_sum_rules,
)
from rgquad.errors import StartupDegenerate
from rgquad.model import ModelSpec, scale_coupling
from rgquad.quad_relations import QuadraticSystem, derive_coefficients
from rgquad.ed_oracle import match_spectra

from conftest import draw_epsilon, draw_pip_epsilon

ROOT2 = math.sqrt(2.0)
# analytic solutions of the two-spin rational system (levels 0 and 1, unit
# field): the equations r0^2 = -r1 + 7/4, r1^2 = r0 + 7/4 factor into
# (r0 + r1)(r0 - r1 + 1) = 0 and two quadratics
XXX2_SOLUTIONS = np.array(
    [
        [-1.5, -0.5],
        [0.5 - ROOT2, -0.5 + ROOT2],
        [0.5, 1.5],
        [0.5 + ROOT2, -0.5 - ROOT2],
    ]
)


def _xxx2_system():
    return derive_coefficients(catalog.xxx_rational([0.0, 1.0], 1.0), 1e-10)


def _fd_jacobian(qsys, r, step=1e-6):
    n = len(r)
    jac = np.zeros((n, n))
    for j in range(n):
        up, down = r.copy(), r.copy()
        up[j] += step
        down[j] -= step
        jac[:, j] = (residual_and_jacobian(qsys, up)[0] - residual_and_jacobian(qsys, down)[0]) / (
            2 * step
        )
    return jac


class TestResidualAndJacobian:
    def test_single_spin(self):
        qsys = QuadraticSystem(C=np.zeros((1, 1)), K=np.array([4.0]), provenance=(("",),))
        F, J = residual_and_jacobian(qsys, np.array([2.0]))
        assert_allclose(F, [0.0])
        assert_allclose(J, [[4.0]])

    def test_xxx2_frozen_point(self):
        # hand evaluation: F(3/2, -1/2) = (9/4 - 1/2 - 7/4, 1/4 - 3/2 - 7/4)
        F, J = residual_and_jacobian(_xxx2_system(), np.array([1.5, -0.5]))
        assert_allclose(F, [0.0, -3.0], atol=1e-14)
        assert_allclose(J, [[3.0, 1.0], [-1.0, -1.0]], atol=1e-14)

    def test_jacobian_matches_finite_differences(self, rng):
        qsys = derive_coefficients(
            catalog.xxz_pip(draw_pip_epsilon(rng, 4), 0.7, 0.3), 1e-10
        )
        for _ in range(100):
            r = rng.uniform(-3, 3, 4)
            _, J = residual_and_jacobian(qsys, r)
            assert_allclose(J, _fd_jacobian(qsys, r), rtol=1e-6, atol=1e-6)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            residual_and_jacobian(_xxx2_system(), np.zeros(3))


class TestNewton:
    def test_scalar_square_root(self):
        qsys = QuadraticSystem(C=np.zeros((1, 1)), K=np.array([4.0]), provenance=(("",),))
        result = newton_solve(qsys, np.array([1.7]))
        assert isinstance(result, EigenvalueTuple)
        assert_allclose(result.r, [2.0], atol=1e-12)

    def test_converges_to_nearby_solution(self):
        qsys = _xxx2_system()
        for target in XXX2_SOLUTIONS:
            result = newton_solve(qsys, target + 0.05)
            assert isinstance(result, EigenvalueTuple)
            assert result.residual_norm <= 1e-12
            assert_allclose(result.r, target, atol=1e-9)

    def test_zero_system_immediate(self):
        qsys = QuadraticSystem(
            C=np.zeros((2, 2)), K=np.zeros(2), provenance=(("", ""), ("", ""))
        )
        result = newton_solve(qsys, np.zeros(2))
        assert isinstance(result, EigenvalueTuple)
        assert_allclose(result.r, np.zeros(2))

    def test_singular_jacobian_reported(self):
        # at r = 0 with C = 0 the Jacobian vanishes identically
        qsys = QuadraticSystem(C=np.zeros((1, 1)), K=np.array([4.0]), provenance=(("",),))
        result = newton_solve(qsys, np.array([0.0]))
        assert isinstance(result, NonConvergence)
        assert result.cause == "singular_jacobian"


class TestDedupe:
    def test_collapses_copies(self):
        t = EigenvalueTuple(r=np.array([1.0, 2.0]), residual_norm=1e-13)
        out = dedupe([t, EigenvalueTuple(r=np.array([1.0, 2.0]), residual_norm=1e-12)], 1e-7)
        assert out.found == 1
        assert out.tuples[0].residual_norm == 1e-13

    def test_keeps_separated_tuples(self):
        tol = 1e-6
        a = EigenvalueTuple(r=np.array([0.0]), residual_norm=0.0)
        b = EigenvalueTuple(r=np.array([10 * tol]), residual_norm=0.0)
        assert dedupe([a, b], tol).found == 2

    def test_noisy_cluster_keeps_lowest_residual(self):
        tol = 1e-6
        base = np.array([1.0, -1.0])
        members = [
            EigenvalueTuple(r=base + 0.1 * tol, residual_norm=3e-13),
            EigenvalueTuple(r=base, residual_norm=1e-13),
            EigenvalueTuple(r=base - 0.1 * tol, residual_norm=2e-13),
        ]
        out = dedupe(members, tol)
        assert out.found == 1
        assert out.tuples[0].residual_norm == 1e-13
        assert_allclose(out.tuples[0].r, base)


class TestHomotopy:
    def test_decoupled_limit_returns_sign_grid(self, rng):
        b = rng.uniform(0.5, 2.0, 3)
        field = np.zeros((3, 3))
        field[:, 2] = b
        spec = ModelSpec(field=field, coupling=np.zeros((3, 3, 3)))
        solution = solve_all_homotopy(spec)
        assert solution.complete and solution.found == 8
        expected = sorted(
            tuple(s * bi for s, bi in zip(signs, b))
            for signs in np.ndindex(2, 2, 2)
            for signs in [tuple(1 if x == 0 else -1 for x in signs)]
        )
        got = sorted(tuple(t.r) for t in solution.tuples)
        assert_allclose(np.array(got), np.array(expected), atol=1e-12)

    def test_xxx2_matches_analytic_solutions(self):
        solution = solve_all_homotopy(catalog.xxx_rational([0.0, 1.0], 1.0))
        assert solution.found == 4
        assert_allclose(solution.as_array(), XXX2_SOLUTIONS, atol=1e-9)
        for t in solution.tuples:
            assert t.residual_norm <= 1e-12
            assert t.branch_tag is not None

    def test_xxx6_complete_with_sum_rule(self, rng):
        spec = catalog.xxx_rational(draw_epsilon(rng, 6), 1.0)
        solution = solve_all_homotopy(spec)
        assert solution.found == 64
        arr = solution.as_array()
        assert np.max(np.abs(arr.sum(axis=0))) <= 1e-8 * 64 * max(1.0, np.abs(arr).max())

    def test_residuals_reassertable(self, rng):
        spec = catalog.xxz_pip(draw_pip_epsilon(rng, 4), 0.8, 0.4)
        qsys = derive_coefficients(spec, 1e-10)
        solution = solve_all_homotopy(spec, qsys=qsys)
        for t in solution.tuples:
            F, _ = residual_and_jacobian(qsys, t.r)
            assert np.linalg.norm(F) <= 1e-12

    def test_startup_degenerate_raises(self):
        spec = catalog.xxx_rational([0.0, 1.0], 0.0)
        with pytest.raises(StartupDegenerate):
            solve_all_homotopy(spec)

    def test_nearby_coupling_scales_move_continuously(self, rng):
        # solutions of the scaled families at nearby scales pair up closely
        spec = catalog.xxx_rational(draw_epsilon(rng, 3), 1.0)
        sets = [
            solve_all_homotopy(scale_coupling(spec, lam)) for lam in (0.50, 0.52)
        ]
        match = match_spectra(sets[0].as_array(), sets[1].as_array(), tol=0.1)
        assert not match.unmatched_solver and not match.unmatched_oracle
        assert match.max_distance <= 0.05


class TestMultistart:
    def test_single_spin(self):
        qsys = QuadraticSystem(C=np.zeros((1, 1)), K=np.array([4.0]), provenance=(("",),))
        solution = solve_all_multistart(qsys, SolverOptions(seed=1))
        assert solution.complete
        assert_allclose(solution.as_array(), [[-2.0], [2.0]], atol=1e-12)

    def test_agrees_with_homotopy(self, rng):
        spec = catalog.xxx_rational(draw_epsilon(rng, 3), 1.0)
        qsys = derive_coefficients(spec, 1e-10)
        opts = SolverOptions(seed=7)
        from_paths = solve_all_homotopy(spec, opts, qsys=qsys)
        from_samples = solve_all_multistart(qsys, opts)
        assert from_paths.found == from_samples.found == 8
        assert_allclose(
            from_paths.as_array(),
            from_samples.as_array(),
            atol=from_paths.dedupe_tol,
        )

    def test_tiny_sample_count_reports_incomplete(self, rng):
        spec = catalog.xxx_rational(draw_epsilon(rng, 3), 1.0)
        qsys = derive_coefficients(spec, 1e-10)
        solution = solve_all_multistart(qsys, SolverOptions(seed=3, sample_count=2))
        assert solution.found < solution.expected
        assert not solution.complete

    def test_seed_recorded_and_reproducible(self, rng):
        spec = catalog.xxz_pip(draw_pip_epsilon(rng, 3), 0.7, 0.3)
        qsys = derive_coefficients(spec, 1e-10)
        first = solve_all_multistart(qsys, SolverOptions(seed=11))
        second = solve_all_multistart(qsys, SolverOptions(seed=11))
        assert first.seed == second.seed == 11
        assert_allclose(first.as_array(), second.as_array(), atol=0)


def test_solve_auto_falls_back_to_multistart(rng):
    # zero field kills the homotopy startup; auto must still find roots
    eps = draw_epsilon(rng, 2)
    spec = catalog.xxx_rational(eps, 0.0)
    solution = solve_auto(spec, SolverOptions(seed=5))
    assert solution.found >= 1
    assert solution.seed == 5


def test_sum_rules_on_complete_set(rng):
    spec = catalog.xxz_pip(draw_pip_epsilon(rng, 4), 0.75, 0.3)
    qsys = derive_coefficients(spec, 1e-10)
    solution = solve_all_homotopy(spec, qsys=qsys)
    assert solution.complete
    linear, quadratic = spectral_sum_rules(solution, qsys)
    assert np.max(linear) <= 1e-8
    assert np.max(quadratic) <= 1e-8


def test_sum_rules_require_complete_set():
    qsys = QuadraticSystem(C=np.zeros((1, 1)), K=np.array([1.0]), provenance=(("",),))
    partial = dedupe([EigenvalueTuple(r=np.array([1.0]), residual_norm=0.0)], 1e-7)
    with pytest.raises(ValueError, match="complete"):
        spectral_sum_rules(partial, qsys)
