"""Run an external SDP solver and parse its solution file.

The solver is any executable taking ``argv = [problem, solution]`` with
SDPA sparse input and a CSDP-layout solution file: line one holds the
dual vector (m doubles), every later line reads "matno blk i j value"
and matno 2 carries the primal X.  The FLAGCERT_SOLVER environment
variable overrides the solver path.  Exactness never depends on this
step; the parsed floats only seed the rounding stage.
"""

from __future__ import annotations

import math
import os
import subprocess
import tempfile
from dataclasses import dataclass

import numpy as np

from .sdpgen import SdpaFile, read_sdpa

__all__ = ["SolverError", "NumericalSolution", "solve_external",
           "read_solution"]

SYMMETRY_TOL = 1e-12
SLACK_TOL = 1e-8
DEFAULT_TIMEOUT = 600.0


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class NumericalSolution:
    """Primal blocks of a solved instance, in file block order.

    Diagonal (negative-dimension) blocks are stored as 1-d arrays.  The
    named accessors assume the standard layout diag(B, Q1, bound, slacks).
    """

    objective: float
    blocks: tuple[np.ndarray, ...]
    duals: tuple[float, ...]

    @property
    def b(self) -> np.ndarray:
        return self.blocks[0]

    @property
    def q1(self) -> np.ndarray:
        return self.blocks[1]

    @property
    def bound(self) -> float:
        return float(self.blocks[2][0, 0])

    @property
    def slacks(self) -> np.ndarray:
        return self.blocks[3]


def _parse_solution(text: str, problem: SdpaFile) -> NumericalSolution:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise SolverError("empty solution file")
    try:
        duals = tuple(float(v) for v in lines[0].split())
    except ValueError as exc:
        raise SolverError("bad dual vector line: %s" % exc) from None
    if len(duals) != problem.m:
        raise SolverError("expected %d duals, got %d" % (problem.m, len(duals)))

    blocks = []
    for d in problem.dims:
        blocks.append(np.zeros(abs(d) if d < 0 else (d, d)))
    seen: set[tuple[int, int, int]] = set()
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 5:
            raise SolverError("bad entry line: %r" % ln)
        try:
            matno, blk, i, j = (int(p) for p in parts[:4])
            val = float(parts[4])
        except ValueError as exc:
            raise SolverError("bad entry line: %r (%s)" % (ln, exc)) from None
        if matno != 2:
            continue
        if not 1 <= blk <= len(problem.dims):
            raise SolverError("entry for unknown block %d" % blk)
        d = problem.dims[blk - 1]
        if d < 0:
            if i != j or not 1 <= i <= -d:
                raise SolverError("off-diagonal entry in diagonal block %d" % blk)
            blocks[blk - 1][i - 1] = val
            continue
        if not (1 <= i <= d and 1 <= j <= d):
            raise SolverError("entry out of range in block %d: %r" % (blk, ln))
        a, bb = i - 1, j - 1
        if (blk, a, bb) in seen and abs(blocks[blk - 1][a, bb] - val) > SYMMETRY_TOL:
            raise SolverError("asymmetric block %d at (%d, %d)" % (blk, i, j))
        blocks[blk - 1][a, bb] = val
        blocks[blk - 1][bb, a] = val
        seen.add((blk, a, bb))
        seen.add((blk, bb, a))

    objective = 0.0
    for matno, blk, i, j, val in problem.entries:
        if matno != 0:
            continue
        d = problem.dims[blk - 1]
        if d < 0:
            objective += val * blocks[blk - 1][i - 1]
        else:
            x = blocks[blk - 1][i - 1, j - 1]
            objective += val * x * (1 if i == j else 2)
    if not math.isfinite(objective):
        raise SolverError("objective is not finite")

    for blk, arr in enumerate(blocks):
        if arr.ndim == 2 and np.max(np.abs(arr - arr.T), initial=0.0) > SYMMETRY_TOL:
            raise SolverError("parsed block %d is not symmetric" % (blk + 1,))
    last = blocks[-1]
    if last.ndim == 1 and last.size and last.min() < -SLACK_TOL:
        raise SolverError("negative slack %g" % last.min())
    return NumericalSolution(objective, tuple(blocks), duals)


def solve_external(problem_path, solver_path=None,
                   timeout: float = DEFAULT_TIMEOUT,
                   solution_path=None) -> NumericalSolution:
    """Run the solver on ``problem_path`` and parse its solution.

    When ``solution_path`` is given the raw solution file is kept there
    after it parses cleanly.
    """
    solver = os.environ.get("FLAGCERT_SOLVER") or solver_path
    if not solver:
        raise SolverError("no solver given: pass solver_path or set FLAGCERT_SOLVER")
    problem = read_sdpa(problem_path)
    with tempfile.TemporaryDirectory(prefix="flagcert-sdp-") as tmp:
        out_path = os.path.join(tmp, "solution.txt")
        try:
            res = subprocess.run([str(solver), str(problem_path), out_path],
                                 capture_output=True, text=True, timeout=timeout)
        except FileNotFoundError:
            raise SolverError("solver not found: %s" % solver) from None
        except subprocess.TimeoutExpired:
            raise SolverError("solver timed out after %gs" % timeout) from None
        if res.returncode != 0:
            raise SolverError("solver exited with %d: %s"
                              % (res.returncode, res.stderr.strip()[-2000:]))
        try:
            with open(out_path) as fh:
                text = fh.read()
        except OSError:
            raise SolverError("solver wrote no solution file") from None
    parsed = _parse_solution(text, problem)
    if solution_path is not None:
        with open(solution_path, "w") as fh:
            fh.write(text)
    return parsed


def read_solution(solution_path, problem: SdpaFile) -> NumericalSolution:
    """Parse an existing solution file against its problem."""
    with open(solution_path) as fh:
        return _parse_solution(fh.read(), problem)
