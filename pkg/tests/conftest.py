from __future__ import annotations

import random

import numpy as np
import pytest

from flagcert.sdpgen import ReducedProblem, ScalingConfig, build_reduced_problem
from flagcert.solverio import NumericalSolution


@pytest.fixture(scope="session")
def reduced_problem() -> ReducedProblem:
    return build_reduced_problem()


def small_problem() -> ReducedProblem:
    """Two 2x2 blocks, six variables, three constraints (two tight).

    The planted optimum is B = [[1,-1],[-1,1]], Q = [[1,2],[2,4]], both
    PSD of rank one; constraints 0 and 1 sit exactly at slack 35 and
    constraint 2 at 38.  Type-1 plus Type-2 equations pin all six
    variables, so rounding must reproduce the plant exactly.
    """
    a0 = ({(0, 0): 1, (0, 1): 1, (1, 1): 1}, {(0, 0): 2}, {(1, 1): 3})
    a1 = ({(0, 0): 1}, {(0, 1): 1, (1, 1): 1}, {(0, 0): 1, (0, 1): 2})
    return ReducedProblem(
        reps=(0, 1, 2),
        partners=(3, 4, 5),
        b=(36, 45, 50),
        a0=a0,
        a1=a1,
        scaling=ScalingConfig(945, (1, 1)),
        pair_classes=((0, 1), (2, 3)),
        sigma2_to_sigma1=(0, 1),
    )


PLANT_B = np.array([[1.0, -1.0], [-1.0, 1.0]])
PLANT_Q = np.array([[1.0, 2.0], [2.0, 4.0]])
PLANT_VALUES = (1, -1, 1, 1, 2, 4)

INTERIOR_B = np.array([[1.0, 0.0], [0.0, 1.0]])
INTERIOR_Q = np.array([[2.0, 1.0], [1.0, 2.0]])
INTERIOR_VALUES = (1, 0, 1, 2, 1, 2)


def numeric_solution(b, q) -> NumericalSolution:
    return NumericalSolution(0.0, (np.array(b), np.array(q),
                                   np.zeros((1, 1)), np.zeros(3)), ())


def perturbed_solution(scale: float = 1e-7, seed: int = 5) -> NumericalSolution:
    rng = random.Random(seed)

    def noisy(m):
        out = np.array(m, dtype=float)
        n = out.shape[0]
        for i in range(n):
            for j in range(i, n):
                e = scale * (2 * rng.random() - 1)
                out[i, j] += e
                out[j, i] = out[i, j]
        return out

    return numeric_solution(noisy(PLANT_B), noisy(PLANT_Q))


def interior_problem() -> ReducedProblem:
    """Same matrices A, right-hand sides lifted so nothing is tight."""
    base = small_problem()
    # slacks become 37, 42, 39 at the interior plant
    return ReducedProblem(
        reps=base.reps,
        partners=base.partners,
        b=(41, 48, 48),
        a0=base.a0,
        a1=base.a1,
        scaling=base.scaling,
        pair_classes=base.pair_classes,
        sigma2_to_sigma1=base.sigma2_to_sigma1,
    )
