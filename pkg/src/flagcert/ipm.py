"""Reference interior-point solver for the generated semidefinite programs.

Infeasible-start HKM predictor-corrector specialised to block-diagonal
problems in the sparse text format produced by sdpgen.  All arithmetic
runs in numpy extended precision (longdouble), which reaches residuals
around 1e-15 on the shipped problem; that headroom is what makes the
downstream rational rounding reliable.

Maximises <C, X> subject to <A_t, X> = b_t and X block-diagonal PSD.
Dual variables lam satisfy sum(lam_t A_t) - C = Z >= 0 at optimality.
"""

from __future__ import annotations

import sys

import numpy as np

from .sdpgen import SdpaFile, read_sdpa

LD = np.longdouble

DEFAULT_TOL = 1e-14
MAX_ITERATIONS = 120


class IpmError(RuntimeError):
    pass


def _cholesky(a):
    """Lower Cholesky factor, or None if not positive definite."""
    n = a.shape[0]
    l = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - l[j, :j] @ l[j, :j]
        if d <= 0:
            return None
        l[j, j] = np.sqrt(d)
        if j + 1 < n:
            l[j + 1:, j] = (a[j + 1:, j] - l[j + 1:, :j] @ l[j, :j]) / l[j, j]
    return l


def _chol_solve(l, rhs):
    n = l.shape[0]
    y = np.array(rhs, dtype=LD, copy=True)
    for i in range(n):
        y[i] = (y[i] - l[i, :i] @ y[:i]) / l[i, i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - l[i + 1:, i] @ y[i + 1:]) / l[i, i]
    return y


def _chol_inverse(l):
    n = l.shape[0]
    inv = np.empty((n, n), dtype=LD)
    eye = np.eye(n, dtype=LD)
    for c in range(n):
        inv[:, c] = _chol_solve(l, eye[:, c])
    return (inv + inv.T) / 2


def _lu_factor(m):
    """Partial-pivot LU of the (nonsymmetric) Schur matrix.

    Near-zero pivots are perturbed instead of failing; useless directions
    get discarded by the step-length backtracking downstream.
    """
    a = np.array(m, dtype=LD, copy=True)
    n = a.shape[0]
    perm = np.arange(n)
    floor = np.abs(a).max() * LD("1e-30") + LD("1e-300")
    for c in range(n):
        p = c + int(np.argmax(np.abs(a[c:, c])))
        if p != c:
            a[[c, p]] = a[[p, c]]
            perm[[c, p]] = perm[[p, c]]
        if abs(a[c, c]) < floor:
            a[c, c] = floor if a[c, c] >= 0 else -floor
        a[c + 1:, c] /= a[c, c]
        a[c + 1:, c + 1:] -= a[c + 1:, c, None] * a[c, c + 1:]
    return a, perm


def _lu_backsolve(lu, perm, rhs):
    b = rhs[perm]
    n = lu.shape[0]
    for i in range(1, n):
        b[i] -= lu[i, :i] @ b[:i]
    for i in range(n - 1, -1, -1):
        b[i] = (b[i] - lu[i, i + 1:] @ b[i + 1:]) / lu[i, i]
    return b


def _lu_solve_refined(m, lu, perm, rhs):
    """Solve with one step of iterative refinement against the original m."""
    x = _lu_backsolve(lu, perm, rhs)
    x += _lu_backsolve(lu, perm, rhs - m @ x)
    return x


class _BlockProblem:
    """Constraint data split by block, dense per-constraint matrices."""

    def __init__(self, problem: SdpaFile):
        self.m = problem.m
        self.dims = tuple(problem.dims)
        self.b = np.array(problem.rhs, dtype=LD)
        self.dense = [k for k, d in enumerate(self.dims) if d > 0]
        self.diag = [k for k, d in enumerate(self.dims) if d < 0]
        self.amats = {}
        self.cmats = {}
        for k in self.dense:
            n = self.dims[k]
            self.amats[k] = np.zeros((self.m, n, n), dtype=LD)
            self.cmats[k] = np.zeros((n, n), dtype=LD)
        for k in self.diag:
            n = -self.dims[k]
            self.amats[k] = np.zeros((self.m, n), dtype=LD)
            self.cmats[k] = np.zeros(n, dtype=LD)
        for (t, blk, i, j, v) in problem.entries:
            k = blk - 1
            if self.dims[k] > 0:
                tgt = self.cmats[k] if t == 0 else self.amats[k][t - 1]
                tgt[i - 1, j - 1] += v
                if i != j:
                    tgt[j - 1, i - 1] += v
            else:
                if i != j:
                    raise IpmError("off-diagonal entry in diagonal block")
                if t == 0:
                    self.cmats[k][i - 1] += v
                else:
                    self.amats[k][t - 1][i - 1] += v
        self.total_dim = sum(abs(d) for d in self.dims)

    def apply(self, xblocks):
        """Vector of <A_t, X> over all t."""
        out = np.zeros(self.m, dtype=LD)
        for k in self.dense:
            n = self.dims[k]
            out += self.amats[k].reshape(self.m, n * n) @ \
                xblocks[k].reshape(n * n)
        for k in self.diag:
            out += self.amats[k] @ xblocks[k]
        return out

    def combine(self, lam):
        """Blocks of sum_t lam_t A_t."""
        out = {}
        for k in self.dense:
            n = self.dims[k]
            out[k] = (lam @ self.amats[k].reshape(self.m, n * n)
                      ).reshape(n, n)
        for k in self.diag:
            out[k] = lam @ self.amats[k]
        return out

    def inner_c(self, xblocks):
        tot = LD(0)
        for k in self.dense:
            tot += (self.cmats[k] * xblocks[k]).sum()
        for k in self.diag:
            tot += self.cmats[k] @ xblocks[k]
        return tot


def _identity_blocks(bp, scale):
    out = {}
    for k in bp.dense:
        out[k] = np.eye(bp.dims[k], dtype=LD) * scale
    for k in bp.diag:
        out[k] = np.full(-bp.dims[k], scale, dtype=LD)
    return out


def _inner(bp, xb, zb):
    tot = LD(0)
    for k in bp.dense:
        tot += (xb[k] * zb[k]).sum()
    for k in bp.diag:
        tot += xb[k] @ zb[k]
    return tot


def _max_step(bp, xb, dxb, chols):
    """Largest alpha in (0,1] keeping X + alpha dX positive definite."""
    alpha = LD(1)
    for k in bp.diag:
        neg = dxb[k] < 0
        if neg.any():
            bound = (-xb[k][neg] / dxb[k][neg]).min()
            alpha = min(alpha, bound * LD("0.99"))
    while alpha > 1e-10:
        ok = True
        for k in bp.dense:
            if _cholesky(xb[k] + alpha * dxb[k]) is None:
                ok = False
                break
        if ok:
            return alpha
        alpha *= LD("0.8")
    return LD(0)


def solve(problem: SdpaFile, tol: float = DEFAULT_TOL, verbose: bool = False,
          max_iterations: int = MAX_ITERATIONS):
    """Run the predictor-corrector loop.

    Returns (objective, lam, xblocks) with xblocks indexed by block.
    Raises IpmError when the iteration stalls before reaching tol.
    """
    bp = _BlockProblem(problem)
    scale = max(LD(1), np.abs(bp.b).max())
    xb = _identity_blocks(bp, scale ** LD("0.5"))
    zb = _identity_blocks(bp, scale ** LD("0.5"))
    lam = np.zeros(bp.m, dtype=LD)
    ndim = LD(bp.total_dim)

    best = None
    since_improve = 0
    for it in range(max_iterations):
        mu = _inner(bp, xb, zb) / ndim
        rp = bp.b - bp.apply(xb)
        sa = bp.combine(lam)
        rd = {}
        rd_norm = LD(0)
        for k in bp.dense:
            rd[k] = sa[k] - bp.cmats[k] - zb[k]
            rd_norm = max(rd_norm, np.abs(rd[k]).max())
        for k in bp.diag:
            rd[k] = sa[k] - bp.cmats[k] - zb[k]
            rd_norm = max(rd_norm, np.abs(rd[k]).max())
        obj = bp.inner_c(xb)
        gap = mu * ndim
        rp_norm = np.abs(rp).max()
        if verbose:
            print("it %3d  obj %.15Le  rp %.2Le  rd %.2Le  mu %.2Le"
                  % (it, obj, rp_norm, rd_norm, mu), file=sys.stderr)
        done = (rp_norm < tol * scale and rd_norm < tol * scale
                and gap < tol * scale * ndim)
        state = (float(rp_norm + rd_norm + gap), obj, lam.copy(),
                 {k: v.copy() for k, v in xb.items()})
        if best is None or state[0] < best[0]:
            best = state
            since_improve = 0
        else:
            # Schur conditioning grows like 1/mu; once it exceeds working
            # precision the directions are noise and iterating on is futile.
            since_improve += 1
            if since_improve >= 10:
                break
        if done:
            return obj, lam, xb

        zchol = {}
        zinv = {}
        for k in bp.dense:
            c = _cholesky(zb[k])
            if c is None:
                raise IpmError("dual block lost definiteness")
            zchol[k] = c
            zinv[k] = _chol_inverse(c)
        # Schur complement: want M[t,u] = tr(A_t X A_u Z^-1); with
        # U_t = X A_t Z^-1 that is tr(U_u A_t), so the product below
        # builds the transpose and the solve uses m.T.
        m = np.zeros((bp.m, bp.m), dtype=LD)
        for k in bp.dense:
            n = bp.dims[k]
            u = xb[k] @ bp.amats[k] @ zinv[k]
            m += u.reshape(bp.m, n * n) @ \
                bp.amats[k].transpose(0, 2, 1).reshape(bp.m, n * n).T
        for k in bp.diag:
            w = xb[k] / zb[k]
            m += (bp.amats[k] * w) @ bp.amats[k].T
        mt = m.T
        lu, perm = _lu_factor(mt)

        def direction(sigma_mu, cross=None):
            rhs = np.zeros(bp.m, dtype=LD)
            extra = {}
            for k in bp.dense:
                n = bp.dims[k]
                e = sigma_mu * zinv[k] - xb[k] - \
                    xb[k] @ rd[k] @ zinv[k]
                if cross is not None:
                    e -= cross[0][k] @ cross[1][k] @ zinv[k]
                extra[k] = e
                rhs += bp.amats[k].reshape(bp.m, n * n) @ e.reshape(n * n)
            for k in bp.diag:
                e = sigma_mu / zb[k] - xb[k] - xb[k] * rd[k] / zb[k]
                if cross is not None:
                    e -= cross[0][k] * cross[1][k] / zb[k]
                extra[k] = e
                rhs += bp.amats[k] @ e
            dlam = _lu_solve_refined(mt, lu, perm, rhs - rp)
            dz = bp.combine(dlam)
            dx = {}
            for k in bp.dense:
                dz[k] = dz[k] + rd[k]
                step = extra[k] - xb[k] @ dz[k] @ zinv[k]
                dx[k] = (step + step.T) / 2
            for k in bp.diag:
                dz[k] = dz[k] + rd[k]
                dx[k] = extra[k] - xb[k] * dz[k] / zb[k]
            return dx, dz, dlam

        dxa, dza, dla = direction(LD(0))
        ap = _max_step(bp, xb, dxa, zchol)
        ad = _max_step(bp, zb, dza, zchol)
        xa = {k: xb[k] + ap * dxa[k] for k in xb}
        za = {k: zb[k] + ad * dza[k] for k in zb}
        mu_aff = _inner(bp, xa, za) / ndim
        sigma = (mu_aff / mu) ** 3 if mu > 0 else LD(0)
        # Keep complementarity from racing ahead of feasibility, which
        # jams the iterate against the cone boundary.
        if mu < max(rp_norm, rd_norm):
            sigma = max(sigma, LD("0.5"))
        dx, dz, dlam = direction(sigma * mu, cross=(dxa, dza))
        ap = _max_step(bp, xb, dx, zchol) * LD("0.98")
        ad = _max_step(bp, zb, dz, zchol) * LD("0.98")
        if ap <= 0 or ad <= 0:
            break
        for k in xb:
            xb[k] = xb[k] + ap * dx[k]
            zb[k] = zb[k] + ad * dz[k]
        lam = lam + ad * dlam

    # Degenerate problems bottom out before tol; keep the best iterate
    # when it is already orders tighter than the rounding stage needs.
    if best is not None and best[0] < 1e-7 * float(scale):
        if verbose:
            print("ipm: stopping at combined residual %.3e" % best[0],
                  file=sys.stderr)
        return best[1], best[2], best[3]
    raise IpmError("no convergence in %d iterations (best residual %s)"
                   % (max_iterations,
                      "none" if best is None else "%.3e" % best[0]))


def _write_solution(path, problem: SdpaFile, lam, xblocks):
    lines = [" ".join("%.18Le" % v for v in lam)]
    for k, dim in enumerate(problem.dims):
        if dim > 0:
            mat = xblocks[k]
            for i in range(dim):
                for j in range(i, dim):
                    v = (mat[i, j] + mat[j, i]) / 2
                    if v != 0:
                        lines.append("2 %d %d %d %.18Le" % (k + 1, i + 1,
                                                            j + 1, v))
        else:
            vec = xblocks[k]
            for i in range(-dim):
                if vec[i] != 0:
                    lines.append("2 %d %d %d %.18Le" % (k + 1, i + 1,
                                                        i + 1, vec[i]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def solve_file(problem_path: str, solution_path: str, tol: float = DEFAULT_TOL,
               verbose: bool = False):
    problem = read_sdpa(problem_path)
    obj, lam, xblocks = solve(problem, tol=tol, verbose=verbose)
    _write_solution(solution_path, problem, lam, xblocks)
    return float(obj)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    verbose = "-v" in argv
    if verbose:
        argv.remove("-v")
    if len(argv) != 2:
        print("usage: flagcert-solver [-v] problem.dat-s solution.txt",
              file=sys.stderr)
        return 2
    try:
        obj = solve_file(argv[0], argv[1], verbose=verbose)
    except (IpmError, OSError, ValueError) as exc:
        print("flagcert-solver: %s" % exc, file=sys.stderr)
        return 1
    print("objective %.12e" % obj)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
