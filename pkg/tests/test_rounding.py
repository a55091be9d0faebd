from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import (INTERIOR_B, INTERIOR_Q, INTERIOR_VALUES, PLANT_B,
                      PLANT_Q, PLANT_VALUES, interior_problem,
                      numeric_solution, perturbed_solution, small_problem)
from flagcert.rounding import (LinearSystem, PRIMES, RoundingConfig,
                               RoundingError, _dixon_solve,
                               _rational_reconstruct, _truncate,
                               assemble_system, build_and_solve,
                               default_extremal_vectors, exact_solve,
                               extremal_null_vectors, merge_vectors,
                               null_basis, rationalize_basis,
                               tight_constraints)
from flagcert import rounding
from flagcert.flags import enumerate_flags, sigma0, sigma1
from flagcert.sdpgen import ReducedProblem, ScalingConfig

F = Fraction


def test_config_validation():
    cfg = RoundingConfig()
    assert (cfg.eps1, cfg.eps2, cfg.eps3) == (1e-4, 1e-4, 1e-5)
    assert cfg.max_retries == 10 and cfg.denom_bound == 10 ** 4
    assert cfg.truncate_digits == 5
    assert RoundingConfig(eps3=1e-6).truncate_digits == 6
    with pytest.raises(ValueError, match="at most 1e-5"):
        RoundingConfig(eps3=2e-5)
    with pytest.raises(ValueError, match="positive"):
        RoundingConfig(eps1=0.0)
    with pytest.raises(ValueError, match="retry or denominator"):
        RoundingConfig(max_retries=0)
    with pytest.raises(ValueError, match="retry or denominator"):
        RoundingConfig(denom_bound=1)


def test_null_basis_picks_small_eigenvalues():
    q = np.diag([1e-6, 0.7, -1e-8])
    vecs = null_basis(q, 1e-4)
    assert len(vecs) == 2
    for v in vecs:
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12
        assert np.linalg.norm(q @ v) < 1e-5
        # the 0.7 direction stays out
        assert abs(v[1]) < 1e-12
    # the negative eigenvalue sits below every positive threshold
    assert len(null_basis(q, 1e-9)) == 1
    assert len(null_basis(q, 1.0)) == 3
    assert null_basis(np.eye(2), 1e-9) == []


def test_rationalize_basis_gauss_jordan():
    out = rationalize_basis([(0.5, 0.25), (0.25, 0.5)])
    assert out == [(F(1), F(0)), (F(0), F(1))]
    out = rationalize_basis([(0.25, 0.125)])
    assert out == [(F(1), F(1, 2))]


def test_rationalize_basis_rejections():
    with pytest.raises(ValueError, match="at least one vector"):
        rationalize_basis([])
    with pytest.raises(RoundingError, match="vanished"):
        rationalize_basis([(1e-12, -1e-12)])
    cfg = RoundingConfig(denom_bound=2)
    with pytest.raises(RoundingError, match="no rational with denominator"):
        rationalize_basis([(1.0, 0.4)], cfg)


def test_merge_vectors_drops_dependents():
    vecs = [(F(1), F(1), F(0)),
            (F(2), F(2), F(0)),
            (F(0), F(0), F(1)),
            (F(1), F(1), F(1))]
    out = merge_vectors(vecs)
    assert out == [(F(1), F(1), F(0)), (F(0), F(0), F(1))]
    assert merge_vectors([(F(0), F(0))]) == []


def test_tight_constraints_cut():
    slacks = [35.05, 35.2, 34.9, 36.0]
    assert tight_constraints(slacks, 1e-4) == (0, 2)
    assert tight_constraints(slacks, 1e-3) == (0, 1, 2)
    assert tight_constraints(slacks, 1e-4, target=36.0, scale=1) == (0, 1, 2, 3)


def test_truncate_toward_zero():
    assert _truncate(0.123456789, 5) == F(12345, 100000)
    assert _truncate(-0.999999, 5) == F(-99999, 100000)
    assert _truncate(2.0, 5) == 2
    assert _truncate(0.5, 1) == F(1, 2)


def test_rational_reconstruct():
    m = 2 ** 61
    u = 22 * pow(7, -1, m) % m
    assert _rational_reconstruct(u, m) == (22, 7)
    u = (-3 * pow(5, -1, m)) % m
    assert _rational_reconstruct(u, m) == (-3, 5)
    assert _rational_reconstruct(37, 101) is None


def test_dixon_solve_exact():
    p = PRIMES[0]
    assert _dixon_solve([[2, 1], [1, 3]], [5, 10], p) == [F(1), F(3)]
    assert _dixon_solve([[2, 0], [0, 3]], [1, 1], p) == [F(1, 2), F(1, 3)]
    assert _dixon_solve([[1]], [-1], p) == [F(-1)]
    # rank-deficient input is reported, not solved
    assert _dixon_solve([[1, 1], [2, 2]], [1, 2], p) is None


def test_dixon_solve_diverges_on_huge_heights(monkeypatch):
    # the solution 1/10^4000 exceeds any height reachable in 8 lifts
    monkeypatch.setattr(rounding, "MAX_LIFT_ITERATIONS", 8)
    with pytest.raises(RoundingError, match="did not converge"):
        _dixon_solve([[10 ** 4000]], [1], PRIMES[0])


def test_exact_solve_pivot_and_free_split():
    system = LinearSystem(({0: F(1), 1: F(1)},), (F(3),), 3)
    numeric = np.array([0.7, 2.2999999, 0.123456789])
    values, solved = exact_solve(system, numeric, RoundingConfig())
    assert solved.pivot_columns == (0,)
    assert solved.free_columns == (1, 2)
    assert values[1] == F(229999, 100000)
    assert values[2] == F(12345, 100000)
    assert values[0] == F(3) - values[1]


def test_exact_solve_empty_system():
    system = LinearSystem((), (), 2)
    values, solved = exact_solve(system, np.array([0.5, 0.25]),
                                 RoundingConfig())
    assert values == [F(1, 2), F(1, 4)]
    assert solved.pivot_columns == ()
    assert solved.free_columns == (0, 1)


def test_exact_solve_inconsistent():
    system = LinearSystem(({0: F(1)}, {0: F(1)}), (F(1), F(2)), 1)
    with pytest.raises(RoundingError, match="inconsistent system"):
        exact_solve(system, np.array([1.0]), RoundingConfig())


def test_assemble_system_rows():
    prob = small_problem()
    system = assemble_system(prob, [(F(1), F(1))], [], (0,), F(35))
    assert system.num_vars == 6
    assert system.rows[0] == {0: F(1), 1: F(1)}
    assert system.rows[1] == {1: F(1), 2: F(1)}
    assert system.rhs[0] == system.rhs[1] == 0
    # constraint row doubles off-diagonal coefficients
    assert system.rows[2] == {0: F(1), 1: F(2), 2: F(1), 3: F(1)}
    assert system.rhs[2] == F(36) - F(35)


def test_extremal_null_vectors_shape():
    v0 = extremal_null_vectors(sigma0(), enumerate_flags(sigma0(), 4))
    assert len(v0) == 1 and len(v0[0]) == 20
    assert sum(v0[0]) == 1
    assert v0[0][0] == F(1, 27)     # all three free vertices in one part
    assert v0[0][-1] == 0           # complete flag never appears
    v1 = extremal_null_vectors(sigma1(), enumerate_flags(sigma1(), 5))
    assert len(v1) == 1 and len(v1[0]) == 71
    assert sum(v1[0]) == 1


def test_default_extremal_vectors(reduced_problem):
    v0, v1 = default_extremal_vectors(reduced_problem)
    assert len(v0) == 1 and len(v0[0]) == 10
    assert sum(v0[0]) == 1
    assert len(v1) == 1 and len(v1[0]) == 71


def test_recovers_plant_from_exact_input():
    res = build_and_solve(small_problem(),
                          numeric_solution(PLANT_B, PLANT_Q))
    assert res.attempts == 1
    assert [res.solution.value(i) for i in range(6)] == list(PLANT_VALUES)
    assert res.solution.denominator == 1


def test_recovers_plant_from_perturbed_input():
    res = build_and_solve(small_problem(), perturbed_solution())
    assert [res.solution.value(i) for i in range(6)] == list(PLANT_VALUES)


def test_interior_solution_all_free():
    res = build_and_solve(interior_problem(),
                          numeric_solution(INTERIOR_B, INTERIOR_Q))
    assert res.attempts == 1
    assert [res.solution.value(i) for i in range(6)] == list(INTERIOR_VALUES)


def _slack_poison_problem() -> ReducedProblem:
    # the big coefficient amplifies the free-variable truncation of B00
    # into an exact slack 0.5 below target while the float slack stays
    # clear of the tightness cut, forcing one eps2 widening
    return ReducedProblem(
        reps=(0, 1), partners=(2, 3), b=(37, -74964),
        a0=({}, {(0, 0): -150000}),
        a1=({(0, 0): 2}, {}),
        scaling=ScalingConfig(945, (1, 1)),
        pair_classes=((0, 1),), sigma2_to_sigma1=(0,))


def test_goal2_failure_widens_eps2():
    numsol = numeric_solution([[0.499996789]], [[1.0]])
    res = build_and_solve(_slack_poison_problem(), numsol)
    assert res.attempts == 2
    assert res.eps1 == pytest.approx(1e-4)
    assert res.eps2 == pytest.approx(1e-3)
    assert "goal2-failed" in res.log
    assert res.solution.value(0) == F(74999, 150000)
    assert res.solution.value(1) == 1


def _sqrt5_problem() -> ReducedProblem:
    return ReducedProblem(
        reps=(0, 1, 2), partners=(3, 4, 5), b=(37, 41, 46),
        a0=({}, {(0, 0): 5, (1, 1): 5}, {(0, 0): 10, (1, 1): 5}),
        a1=({(0, 0): 2}, {}, {}),
        scaling=ScalingConfig(945, (1, 1)),
        pair_classes=((0, 1), (2, 3)), sigma2_to_sigma1=(0,))


def test_irrational_null_vector_shrinks_eps1():
    # B has eigenvalue 5e-6 with eigenvector slope -1/sqrt(5); every
    # rational guess g satisfies g*g != 1/5, so the tight constraints
    # contradict the guessed null rows until eps1 drops below 5e-6
    v = np.array([math.sqrt(5.0 / 6.0), math.sqrt(1.0 / 6.0)])
    w = np.array([-v[1], v[0]])
    bmat = 1.2 * np.outer(v, v) + 5e-6 * np.outer(w, w)
    res = build_and_solve(_sqrt5_problem(), numeric_solution(bmat, [[1.0]]))
    assert res.attempts == 4
    assert res.eps1 == pytest.approx(1e-6)
    assert res.eps2 == pytest.approx(1e-5)
    assert res.log.count("\n  inconsistent:") == 3
    vals = [res.solution.value(i) for i in range(4)]
    assert vals == [F(1), F(44721, 100000), F(1, 5), F(1)]


def test_guessing_failure_exhausts_retries():
    v = np.array([1.0, 0.4])
    bmat = np.eye(2) - np.outer(v, v) / float(v @ v)
    cfg = RoundingConfig(denom_bound=2, max_retries=3)
    with pytest.raises(RoundingError,
                       match="failed after 3 attempts.*rational guessing"):
        build_and_solve(_sqrt5_problem(), numeric_solution(bmat, [[1.0]]),
                        config=cfg)
