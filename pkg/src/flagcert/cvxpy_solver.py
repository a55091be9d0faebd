"""Fallback SDP solver: a cvxpy front end speaking the CSDP file dialect.

Usage: flagcert-cvxpy-solver problem.dat-s solution.txt

Reads an SDPA sparse file, solves max <C, X> s.t. <A_t, X> = b_t with X
block-diagonal PSD (negative dimensions meaning nonnegative diagonal
blocks), and writes the solution in the layout solverio expects: dual
vector on line one, then "2 blk i j value" primal entries.  Meant for
hosts without a csdp or sdpa binary; install the ``solver`` extra.
"""

from __future__ import annotations

import sys

import numpy as np

from .sdpgen import read_sdpa

__all__ = ["solve_file", "main"]


def _block_vars(cp, dims):
    xs = []
    constraints = []
    for d in dims:
        if d < 0:
            x = cp.Variable(-d, nonneg=True)
        elif d == 1:
            x = cp.Variable((1, 1), symmetric=True)
            constraints.append(x >> 0)
        else:
            x = cp.Variable((d, d), symmetric=True)
            constraints.append(x >> 0)
        xs.append(x)
    return xs, constraints


def _inner(cp, dims, xs, coeffs):
    terms = []
    for (blk, i, j), v in coeffs.items():
        d = dims[blk - 1]
        if d < 0:
            terms.append(v * xs[blk - 1][i - 1])
        elif i == j:
            terms.append(v * xs[blk - 1][i - 1, j - 1])
        else:
            terms.append(2 * v * xs[blk - 1][i - 1, j - 1])
    return cp.sum(terms) if terms else 0


def solve_file(problem_path, solution_path, solver_name=None) -> float:
    try:
        import cvxpy as cp
    except ImportError:
        raise SystemExit(
            "cvxpy is required for the bundled solver; install the "
            "'solver' extra or point FLAGCERT_SOLVER at a csdp binary")
    f = read_sdpa(problem_path)
    obj_coeffs: dict = {}
    con_coeffs: list[dict] = [{} for _ in range(f.m)]
    for matno, blk, i, j, v in f.entries:
        key = (blk, i, j) if (f.dims[blk - 1] < 0 or i <= j) else (blk, j, i)
        if matno == 0:
            obj_coeffs[key] = obj_coeffs.get(key, 0) + v
        else:
            con_coeffs[matno - 1][key] = con_coeffs[matno - 1].get(key, 0) + v

    xs, constraints = _block_vars(cp, f.dims)
    eqs = [_inner(cp, f.dims, xs, con_coeffs[t]) == f.rhs[t] for t in range(f.m)]
    prob = cp.Problem(cp.Maximize(_inner(cp, f.dims, xs, obj_coeffs)),
                      constraints + eqs)
    if solver_name is None:
        installed = cp.installed_solvers()
        solver_name = "CLARABEL" if "CLARABEL" in installed else "SCS"
    # rounding wants every digit the backend can give
    opts = {}
    if solver_name == "CLARABEL":
        opts = {"tol_gap_abs": 1e-12, "tol_gap_rel": 1e-12,
                "tol_feas": 1e-12, "max_iter": 200}
    elif solver_name == "SCS":
        opts = {"eps": 1e-9, "max_iters": 200000}
    prob.solve(solver=solver_name, **opts)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise SystemExit("solve failed with status %s" % prob.status)

    lines = []
    duals = []
    for eq in eqs:
        d = eq.dual_value
        duals.append(float(d) if d is not None and np.ndim(d) == 0 else
                     float(np.asarray(d).reshape(-1)[0]) if d is not None else 0.0)
    lines.append(" ".join("%.18e" % v for v in duals))
    for bi, (d, x) in enumerate(zip(f.dims, xs), start=1):
        val = x.value
        if val is None:
            raise SystemExit("solver returned no value for block %d" % bi)
        arr = np.asarray(val)
        if d < 0:
            for i in range(-d):
                if arr[i] != 0.0:
                    lines.append("2 %d %d %d %.18e" % (bi, i + 1, i + 1, arr[i]))
        else:
            arr = arr.reshape(abs(d), abs(d))
            for i in range(d):
                for j in range(i, d):
                    v = (arr[i, j] + arr[j, i]) / 2.0
                    if v != 0.0:
                        lines.append("2 %d %d %d %.18e" % (bi, i + 1, j + 1, v))
    with open(solution_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return float(prob.value)


def main(argv=None) -> int:
    args = sys.argv[1:] if argv is None else list(argv)
    if len(args) != 2:
        print("usage: flagcert-cvxpy-solver PROBLEM.dat-s SOLUTION.txt",
              file=sys.stderr)
        return 2
    solve_file(args[0], args[1])
    return 0


if __name__ == "__main__":
    sys.exit(main())
