"""Round the numerical SDP solution to an exact rational certificate.

Two goals: the rounded blocks must be positive semidefinite (Goal 1)
and every constraint slack must stay at or above the target bound
(Goal 2).  The recipe collects Type-1 equations (the blocks must kill
their near-null eigenvectors, rationalized by Gauss-Jordan
normalization plus continued-fraction guessing, merged with the exact
null vectors forced by the balanced 3-partite extremal object) and
Type-2 equations (near-tight constraints pinned to the target exactly),
then solves the combined linear system over the matrix entries: the
first maximal independent set of columns is solved for exactly, every
remaining entry is frozen at its numerical value truncated to 5 digits.

The exact solve is two-stage: pivot columns and rows are found by
Gaussian elimination modulo a word-sized prime, then the square system
is lifted p-adically with early-exit rational reconstruction, and the
result is verified against every input equation over the rationals, so
a wrong answer cannot escape this module.  Failures adjust eps1/eps2
deterministically and retry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import product
from math import isqrt, lcm

import numpy as np

from .certify import psd_check, ut_index
from .flags import FlagBasis, TypeGraph, enumerate_flags, sigma0, sigma1
from .graphs import Graph

__all__ = [
    "RoundingConfig",
    "RoundingError",
    "LinearSystem",
    "ExactSolution",
    "RoundingResult",
    "null_basis",
    "rationalize_basis",
    "tight_constraints",
    "extremal_null_vectors",
    "merge_vectors",
    "assemble_system",
    "exact_solve",
    "build_and_solve",
]

PRIMES = (2147483647, 2147483629, 2147483587)
TARGET_SCALED = Fraction(35)
MAX_LIFT_ITERATIONS = 4000


class RoundingError(RuntimeError):
    pass


@dataclass(frozen=True)
class RoundingConfig:
    eps1: float = 1e-4
    eps2: float = 1e-4
    eps3: float = 1e-5
    max_retries: int = 10
    denom_bound: int = 10 ** 4

    def __post_init__(self):
        if min(self.eps1, self.eps2, self.eps3) <= 0:
            raise ValueError("thresholds must be positive")
        if self.eps3 > 1e-5:
            raise ValueError("eps3 must be at most 1e-5")
        if self.max_retries < 1 or self.denom_bound < 2:
            raise ValueError("bad retry or denominator bound")

    @property
    def truncate_digits(self) -> int:
        return max(1, round(-math.log10(self.eps3)))


@dataclass(frozen=True)
class LinearSystem:
    """Equations over the stacked upper-triangle entries of the blocks."""

    rows: tuple
    rhs: tuple
    num_vars: int
    pivot_columns: tuple = ()
    free_columns: tuple = ()
    free_values: tuple = ()


@dataclass(frozen=True)
class ExactSolution:
    denominator: int
    numerators: tuple

    @classmethod
    def from_fractions(cls, values) -> "ExactSolution":
        den = 1
        for v in values:
            den = lcm(den, v.denominator)
        return cls(den, tuple(int(v * den) for v in values))

    def value(self, i: int) -> Fraction:
        return Fraction(self.numerators[i], self.denominator)


@dataclass(frozen=True)
class RoundingResult:
    solution: ExactSolution
    log: str
    attempts: int
    eps1: float
    eps2: float


def null_basis(q, eps1: float):
    """Orthonormal eigenvectors of the symmetric q with eigenvalue < eps1."""
    vals, vecs = np.linalg.eigh(np.asarray(q, dtype=float))
    return [vecs[:, i].copy() for i in range(len(vals)) if vals[i] < eps1]


def rationalize_basis(vectors, config: RoundingConfig = RoundingConfig()):
    """Gauss-Jordan normalization, then guess each entry as a rational.

    Each vector is scaled by its largest entry and eliminated from the
    others; the cleaned entries are matched to fractions with
    denominator <= denom_bound, residual < 10*eps3 each.
    """
    if not vectors:
        raise ValueError("rationalize_basis needs at least one vector")
    xs = [np.array(v, dtype=float).copy() for v in vectors]
    for i in range(len(xs)):
        piv = int(np.argmax(np.abs(xs[i])))
        top = xs[i][piv]
        if abs(top) < 1e-9:
            raise RoundingError("vector %d vanished during normalization" % i)
        xs[i] = xs[i] / top
        for k in range(len(xs)):
            if k != i:
                xs[k] = xs[k] - xs[k][piv] * xs[i]
    out = []
    tol = 10 * config.eps3
    for i, x in enumerate(xs):
        entries = []
        for j, v in enumerate(x):
            guess = Fraction(float(v)).limit_denominator(config.denom_bound)
            if abs(float(guess) - float(v)) >= tol:
                raise RoundingError(
                    "no rational with denominator <= %d within %g of entry "
                    "%r (vector %d, coordinate %d)"
                    % (config.denom_bound, tol, float(v), i, j))
            entries.append(guess)
        out.append(tuple(entries))
    return out


def tight_constraints(slacks, eps2: float, target: float = 35.0,
                      scale: int = 945):
    """Indices whose scaled slack is within eps2*scale of the target."""
    cut = target + eps2 * scale
    return tuple(t for t, s in enumerate(slacks) if s < cut)


def extremal_null_vectors(sigma: TypeGraph, basis: FlagBasis):
    """Exact flag-density vectors of the balanced 3-partite limit object.

    For each placement of sigma's labeled vertices into three infinite
    parts (edge iff different parts), the entries give the probability
    that uniformly placed free vertices complete each basis flag.
    Distinct placements often induce the same vector; duplicates drop.
    """
    k, l = sigma.k, basis.l
    free = l - k
    placements = []
    for phi in product(range(3), repeat=k):
        if all(sigma.graph.has_edge(i, j) == (phi[i] != phi[j])
               for i in range(k) for j in range(i + 1, k)):
            placements.append(phi)
    out = []
    for phi in placements:
        counts = [0] * len(basis.flags)
        for assign in product(range(3), repeat=free):
            parts = phi + assign
            edges = [(a, b) for a in range(l) for b in range(a + 1, l)
                     if parts[a] != parts[b]]
            g = Graph.from_edges(l, edges)
            counts[basis.index_of_code(_flag_code(g, k))] += 1
        vec = tuple(Fraction(c, 3 ** free) for c in counts)
        if vec not in out:
            out.append(vec)
    return out


def _flag_code(g: Graph, k: int) -> int:
    from .flags import Flag, flag_canonical_form
    return flag_canonical_form(Flag(g, tuple(range(k)))).code


def merge_vectors(vectors):
    """Independent spanning subset via exact row reduction."""
    result = []
    pivots = []
    for vec in vectors:
        row = list(vec)
        for prow, pcol in zip(result, pivots):
            f = row[pcol]
            if f:
                row = [a - f * b for a, b in zip(row, prow)]
        pcol = next((c for c, v in enumerate(row) if v), None)
        if pcol is None:
            continue
        top = row[pcol]
        result.append([v / top for v in row])
        pivots.append(pcol)
    return [tuple(r) for r in result]


def _block_offsets(problem):
    n0, n1 = problem.block_dims[0], problem.block_dims[1]
    return n0, n1, n0 * (n0 + 1) // 2


def _numeric_vector(problem, numsol) -> np.ndarray:
    n0, n1, off1 = _block_offsets(problem)
    x = np.zeros(problem.num_vars)
    b0 = np.asarray(numsol.blocks[0])
    b1 = np.asarray(numsol.blocks[1])
    for i in range(n0):
        for j in range(i, n0):
            x[ut_index(n0, i, j)] = b0[i, j]
    for i in range(n1):
        for j in range(i, n1):
            x[off1 + ut_index(n1, i, j)] = b1[i, j]
    return x


def _numeric_slacks(problem, numsol):
    b0 = np.asarray(numsol.blocks[0])
    b1 = np.asarray(numsol.blocks[1])
    out = []
    for t in range(len(problem.reps)):
        s = 0.0
        for (i, j), a in problem.a0[t].items():
            s += a * b0[i, j] * (1 if i == j else 2)
        for (i, j), a in problem.a1[t].items():
            s += a * b1[i, j] * (1 if i == j else 2)
        out.append(problem.b[t] - s)
    return out


def _exact_slacks(problem, values):
    n0, n1, off1 = _block_offsets(problem)
    out = []
    for t in range(len(problem.reps)):
        s = Fraction(0)
        for (i, j), a in problem.a0[t].items():
            s += a * values[ut_index(n0, i, j)] * (1 if i == j else 2)
        for (i, j), a in problem.a1[t].items():
            s += a * values[off1 + ut_index(n1, i, j)] * (1 if i == j else 2)
        out.append(problem.b[t] - s)
    return out


def assemble_system(problem, vectors0, vectors1, tight, target) -> LinearSystem:
    """Type-1 rows (block * vector = 0) plus Type-2 rows (slack = target)."""
    n0, n1, off1 = _block_offsets(problem)
    rows = []
    rhs = []
    for n, offset, vectors in ((n0, 0, vectors0), (n1, off1, vectors1)):
        for vec in vectors:
            for i in range(n):
                row = {}
                for j in range(n):
                    if vec[j]:
                        row[offset + ut_index(n, min(i, j), max(i, j))] = vec[j]
                if row:
                    rows.append(row)
                    rhs.append(Fraction(0))
    for t in tight:
        row = {}
        for (i, j), a in problem.a0[t].items():
            row[ut_index(n0, i, j)] = Fraction(a * (1 if i == j else 2))
        for (i, j), a in problem.a1[t].items():
            row[off1 + ut_index(n1, i, j)] = Fraction(a * (1 if i == j else 2))
        rows.append(row)
        rhs.append(Fraction(problem.b[t]) - target)
    return LinearSystem(tuple(rows), tuple(rhs), problem.num_vars)


def _truncate(x: float, digits: int) -> Fraction:
    scale = 10 ** digits
    return Fraction(int(x * scale), scale)


def _mod_matrix(rows, num_vars, p):
    a = np.zeros((len(rows), num_vars), dtype=np.int64)
    for r, row in enumerate(rows):
        for c, v in row.items():
            a[r, c] = v.numerator % p * pow(v.denominator, -1, p) % p
    return a


def _row_echelon_mod(a, p):
    """In-place echelon; returns (pivot original-row indices, pivot cols)."""
    k, m = a.shape
    orig = list(range(k))
    piv_rows, piv_cols = [], []
    r = 0
    for c in range(m):
        if r == k:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            a[[r, pr]] = a[[pr, r]]
            orig[r], orig[pr] = orig[pr], orig[r]
        inv = pow(int(a[r, c]), -1, p)
        if r + 1 < k:
            f = a[r + 1:, c] * inv % p
            a[r + 1:, c:] = (a[r + 1:, c:] - f[:, None] * a[r, c:]) % p
        piv_rows.append(orig[r])
        piv_cols.append(c)
        r += 1
    return piv_rows, piv_cols


def _lu_mod(s, p):
    """In-place LU mod p with partial pivoting; multipliers below diagonal."""
    r = s.shape[0]
    perm = []
    for c in range(r):
        nz = np.nonzero(s[c:, c])[0]
        if nz.size == 0:
            return None
        pr = c + int(nz[0])
        if pr != c:
            s[[c, pr]] = s[[pr, c]]
        perm.append(pr)
        inv = pow(int(s[c, c]), -1, p)
        if c + 1 < r:
            f = s[c + 1:, c] * inv % p
            s[c + 1:, c + 1:] = (s[c + 1:, c + 1:] - f[:, None] * s[c, c + 1:]) % p
            s[c + 1:, c] = f
    return perm


def _lu_solve(lu, perm, invdiag, b, p):
    y = b.copy()
    for c, pr in enumerate(perm):
        if pr != c:
            y[[c, pr]] = y[[pr, c]]
        if c + 1 < len(y):
            y[c + 1:] = (y[c + 1:] - lu[c + 1:, c] * y[c]) % p
    r = len(y)
    for c in range(r - 1, -1, -1):
        if c + 1 < r:
            # products stay below 2^62; reduce before summing
            s = int((lu[c, c + 1:] * y[c + 1:] % p).sum() % p)
            y[c] = (y[c] - s) % p
        y[c] = y[c] * invdiag[c] % p
    return y


def _rational_reconstruct(u, modulus):
    """The unique n/d with |n|, d <= sqrt(modulus/2), n = u*d mod modulus."""
    bound = isqrt(modulus // 2)
    r0, r1 = modulus, u % modulus
    t0, t1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if t1 == 0 or abs(t1) > bound:
        return None
    n, d = r1, t1
    if d < 0:
        n, d = -n, -d
    if math.gcd(n, d) != 1:
        return None
    return n, d


def _dixon_solve(s_rows, rhs, p):
    """Exact solution of the nonsingular integer system s x = rhs."""
    r = len(s_rows)
    lu = np.array([[v % p for v in row] for row in s_rows], dtype=np.int64)
    perm = _lu_mod(lu, p)
    if perm is None:
        return None
    invdiag = [pow(int(lu[c, c]), -1, p) for c in range(r)]
    # exact bigint matrix for the residual updates, via object dot
    smat = np.empty((r, r), dtype=object)
    for i, row in enumerate(s_rows):
        for j, v in enumerate(row):
            smat[i, j] = v
    # a cheap mod-q screen guards the expensive exact candidate check;
    # the 16-bit split keeps every int64 accumulation below 2^58
    q = next(x for x in PRIMES if x != p)
    sq = np.array([[v % q for v in row] for row in s_rows], dtype=np.int64)
    sq_hi, sq_lo = sq >> 16, sq & 0xFFFF
    rhs_q = np.array([v % q for v in rhs], dtype=np.int64)
    xacc = [0] * r
    bcur = list(rhs)
    ppow = 1
    for it in range(MAX_LIFT_ITERATIONS):
        bmod = np.array([v % p for v in bcur], dtype=np.int64)
        c = _lu_solve(lu, perm, invdiag, bmod, p)
        for i in range(r):
            xacc[i] += int(c[i]) * ppow
        ppow *= p
        c_obj = np.empty(r, dtype=object)
        for i in range(r):
            c_obj[i] = int(c[i])
        sc = smat.dot(c_obj)
        for i in range(r):
            bcur[i] = (bcur[i] - sc[i]) // p
        if all(v == 0 for v in bcur):
            return [Fraction(x) for x in xacc]
        if it % 4 == 3:
            cand = []
            for x in xacc:
                nd = _rational_reconstruct(x % ppow, ppow)
                if nd is None:
                    break
                cand.append(nd)
            if len(cand) == r:
                den = 1
                for _, d in cand:
                    den = lcm(den, d)
                nums = [n * (den // d) for n, d in cand]
                nq = np.array([v % q for v in nums], dtype=np.int64)
                lhs = (((sq_hi @ nq) % q << 16) + sq_lo @ nq) % q
                if np.array_equal(lhs, rhs_q * (den % q) % q) \
                        and all(sum(a * b for a, b in zip(row, nums)) == rv * den
                                for row, rv in zip(s_rows, rhs)):
                    return [Fraction(n, den) for n in nums]
    raise RoundingError("p-adic lifting did not converge in %d iterations"
                        % MAX_LIFT_ITERATIONS)


def exact_solve(system: LinearSystem, numeric, config: RoundingConfig):
    """Solve pivot variables exactly with free variables truncated.

    Returns (values, system-with-pivot-data).  Raises RoundingError if
    the equations are inconsistent with every prime tried.
    """
    digits = config.truncate_digits
    m = system.num_vars
    last_error = None
    for p in PRIMES:
        # echelon on [A | b]: a pivot landing in the rhs column means some
        # row reduced to 0 = nonzero, so the fixed-free-variable system
        # cannot be consistent either and the lift would be wasted work
        rhs_col = np.array(
            [rv.numerator % p * pow(rv.denominator, -1, p) % p
             for rv in system.rhs], dtype=np.int64).reshape(-1, 1)
        a = np.hstack([_mod_matrix(system.rows, m, p), rhs_col])
        piv_rows, piv_cols = _row_echelon_mod(a, p)
        del a
        if piv_cols and piv_cols[-1] == m:
            last_error = ("equation %d inconsistent (rank %d, prime %d)"
                          % (piv_rows[-1], len(piv_cols) - 1, p))
            continue
        piv_col_set = set(piv_cols)
        free_cols = tuple(c for c in range(m) if c not in piv_col_set)
        free_vals = tuple(_truncate(float(numeric[c]), digits)
                          for c in free_cols)
        free_map = dict(zip(free_cols, free_vals))
        solved = {}
        if piv_cols:
            s_rows, s_rhs = [], []
            for pr in piv_rows:
                row = system.rows[pr]
                rv = system.rhs[pr]
                coeffs = []
                for c in piv_cols:
                    coeffs.append(row.get(c, Fraction(0)))
                for c, v in row.items():
                    if c in free_map:
                        rv = rv - v * free_map[c]
                den = 1
                for x in coeffs:
                    den = lcm(den, x.denominator)
                den = lcm(den, rv.denominator)
                s_rows.append([int(x * den) for x in coeffs])
                s_rhs.append(int(rv * den))
            sol = _dixon_solve(s_rows, s_rhs, p)
            if sol is None:
                last_error = "pivot system singular modulo %d" % p
                continue
            solved = dict(zip(piv_cols, sol))
        values = [solved.get(c, free_map.get(c, Fraction(0)))
                  for c in range(m)]
        # verify every equation; integer-scaled so no Fraction gcd churn
        den_all = 1
        for v in values:
            den_all = lcm(den_all, v.denominator)
        nums_all = [int(v * den_all) for v in values]
        bad = None
        for r, (row, rv) in enumerate(zip(system.rows, system.rhs)):
            rden = rv.denominator
            for v in row.values():
                rden = lcm(rden, v.denominator)
            acc = 0
            for c, v in row.items():
                acc += v.numerator * (rden // v.denominator) * nums_all[c]
            if acc != rv.numerator * (rden // rv.denominator) * den_all:
                bad = r
                break
        if bad is None:
            done = replace(system, pivot_columns=tuple(piv_cols),
                           free_columns=free_cols, free_values=free_vals)
            return values, done
        last_error = ("equation %d inconsistent (rank %d, prime %d)"
                      % (bad, len(piv_cols), p))
    raise RoundingError("inconsistent system: %s" % last_error)


def default_extremal_vectors(problem):
    """Extremal null vectors in the reduced variable spaces of the blocks."""
    v0 = extremal_null_vectors(sigma0(), enumerate_flags(sigma0(), 4))
    proj = []
    for v in v0:
        pv = tuple(v[i] + v[j] for i, j in problem.pair_classes)
        if pv not in proj:
            proj.append(pv)
    v1 = extremal_null_vectors(sigma1(), enumerate_flags(sigma1(), 5))
    return tuple(proj), tuple(v1)


def _block_matrix(values, n, offset):
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            v = values[offset + ut_index(n, i, j)]
            rows[i][j] = v
            rows[j][i] = v
    return tuple(tuple(r) for r in rows)


def build_and_solve(problem, numsol, config: RoundingConfig = None,
                    target: Fraction = TARGET_SCALED,
                    extremal=None) -> RoundingResult:
    """Full rounding loop with the deterministic retry policy.

    PSD failure widens eps1 (more Type-1 equations), a slack dropping
    below the target widens eps2 (more Type-2 equations), an
    inconsistent system shrinks eps1 then eps2 alternately.
    """
    config = config or RoundingConfig()
    n0, n1, off1 = _block_offsets(problem)
    numeric = _numeric_vector(problem, numsol)
    slacks_num = _numeric_slacks(problem, numsol)
    if extremal is None:
        if (n0, n1) == (10, 71):
            extremal = default_extremal_vectors(problem)
        else:
            extremal = ((), ())
    eps1, eps2 = config.eps1, config.eps2
    shrink_eps2_next = False
    log = ["config eps1=%g eps2=%g eps3=%g denom_bound=%d max_retries=%d"
           % (config.eps1, config.eps2, config.eps3, config.denom_bound,
              config.max_retries)]
    last_fail = "no attempt ran"
    for attempt in range(1, config.max_retries + 1):
        head = "attempt %d eps1=%g eps2=%g" % (attempt, eps1, eps2)
        raw0 = null_basis(numsol.blocks[0], eps1)
        raw1 = null_basis(numsol.blocks[1], eps1)
        try:
            rat0 = rationalize_basis(raw0, config) if raw0 else []
            rat1 = rationalize_basis(raw1, config) if raw1 else []
        except RoundingError as exc:
            last_fail = "rational guessing: %s" % exc
            log.append("%s guessing-failed: %s" % (head, exc))
            eps1 /= 10
            continue
        vecs0 = merge_vectors(list(rat0) + list(extremal[0]))
        vecs1 = merge_vectors(list(rat1) + list(extremal[1]))
        tight = tight_constraints(slacks_num, eps2, float(target),
                                  problem.scaling.M)
        system = assemble_system(problem, vecs0, vecs1, tight, target)
        log.append("%s null0=%d(+%d raw) null1=%d(+%d raw) tight=%d rows=%d"
                   % (head, len(vecs0), len(raw0), len(vecs1), len(raw1),
                      len(tight), len(system.rows)))
        try:
            values, solved = exact_solve(system, numeric, config)
        except RoundingError as exc:
            last_fail = "inconsistent system: %s" % exc
            log.append("  inconsistent: %s" % exc)
            if shrink_eps2_next:
                eps2 /= 10
            else:
                eps1 /= 10
            shrink_eps2_next = not shrink_eps2_next
            continue
        log.append("  rank=%d free=%d" % (len(solved.pivot_columns),
                                          len(solved.free_columns)))
        bmat = _block_matrix(values, n0, 0)
        qmat = _block_matrix(values, n1, off1)
        w0, w1 = psd_check(bmat), psd_check(qmat)
        if not (w0.ok and w1.ok):
            bad = "B" if not w0.ok else "Q1"
            last_fail = "Goal 1: block %s not PSD (%s)" % (
                bad, (w0 if not w0.ok else w1).failure)
            log.append("  goal1-failed: %s" % last_fail)
            eps1 *= 10
            continue
        slacks = _exact_slacks(problem, values)
        low = [t for t, s in enumerate(slacks) if s < target]
        if low:
            last_fail = ("Goal 2: %d slacks below target, first at "
                         "representative %d" % (len(low), low[0]))
            log.append("  goal2-failed: %s" % last_fail)
            eps2 *= 10
            continue
        solution = ExactSolution.from_fractions(values)
        log.append("  success denominator=%d tight=%d"
                   % (solution.denominator,
                      sum(1 for s in slacks if s == target)))
        return RoundingResult(solution, "\n".join(log) + "\n", attempt,
                              eps1, eps2)
    err = RoundingError("rounding failed after %d attempts; last failure: %s"
                        % (config.max_retries, last_fail))
    err.log = "\n".join(log) + "\n"
    raise err
