"""Exact verification of a candidate certificate.

Everything here runs over integers and Fractions; no float enters the
arithmetic (load-time checks reject them, and tests flip float_poison()
to audit the hot loops entry by entry).  Given a solution vector this
module rebuilds the matrices, recomputes every constraint slack
exactly, decides positive semidefiniteness by a fraction-free LDL^T
with complete diagonal pivoting, and inspects the structure of the
tight classes.

The solution vector file is the one exchange format rounding and
verification agree on: a denominator, 2611 numerators (upper triangle
of the 10x10 class matrix B row-major, then the 71x71 Q1), and a
digest of the flag orders that pins the index conventions.
"""

from __future__ import annotations

import hashlib
from contextlib import contextmanager
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations
from math import lcm

from .flags import (complement_index_map, enumerate_flags, flag_canonical_form,
                    sigma0, sigma1, sigma2)
from .graphs import Graph, canonical_form, enumerate_admissible
from .sdpgen import ReducedProblem, sigma0_pair_classes

__all__ = [
    "VARIABLE_COUNT",
    "SolutionVectorFile",
    "PsdWitness",
    "Inspection",
    "Certificate",
    "float_poison",
    "ut_index",
    "order_digest",
    "make_solution",
    "load_solution",
    "serialize_solution",
    "write_solution",
    "reconstruct",
    "compute_bound",
    "psd_check",
    "property_a",
    "property_b",
    "inspect_tight_set",
    "verify_solution",
    "render_certificate",
]

B_SIZE = 10
Q_SIZE = 71
VARIABLE_COUNT = B_SIZE * (B_SIZE + 1) // 2 + Q_SIZE * (Q_SIZE + 1) // 2

_POISON = False


@contextmanager
def float_poison():
    """Audit mode for tests: every value touched must be int or Fraction."""
    global _POISON
    old = _POISON
    _POISON = True
    try:
        yield
    finally:
        _POISON = old


def _rat(x, where="entry"):
    if isinstance(x, bool) or not isinstance(x, (int, Fraction)):
        raise TypeError("%s must be an int or Fraction, got %s"
                        % (where, type(x).__name__))
    return x


def ut_index(n: int, i: int, j: int) -> int:
    """Position of (i, j), i <= j, in the row-major upper triangle."""
    if not 0 <= i <= j < n:
        raise ValueError("bad upper-triangle position (%d, %d)" % (i, j))
    return i * n - i * (i - 1) // 2 + (j - i)


@dataclass(frozen=True)
class SolutionVectorFile:
    denominator: int
    numerators: tuple
    digest: str


@dataclass(frozen=True)
class PsdWitness:
    """Replayable record of the pivoted fraction-free factorization.

    pivots[k] is the k-th leading principal minor of scale*P^T M P; all
    must be positive, and a run may stop early only when the remaining
    submatrix is identically zero (rank deficiency).
    """

    ok: bool
    n: int
    scale: int
    permutation: tuple
    pivots: tuple
    rank: int
    failure: str = ""
    failure_value: int = 0


@dataclass(frozen=True)
class Inspection:
    code: int
    property_a: bool
    property_b: bool


@dataclass(frozen=True)
class Certificate:
    bound_scaled: Fraction
    bound: Fraction
    slacks: tuple
    tight_set: tuple
    psd_witnesses: tuple = ()
    inspections: tuple = ()


def order_digest() -> str:
    """Hash of the flag orders every solution vector is indexed by."""
    b0 = enumerate_flags(sigma0(), 4)
    b1 = enumerate_flags(sigma1(), 5)
    pairs = sigma0_pair_classes(b0)
    forms0 = ["%x:%x" % (flag_canonical_form(b0.flags[i]).code,
                         flag_canonical_form(b0.flags[j]).code)
              for i, j in pairs]
    forms1 = ["%x" % flag_canonical_form(f).code for f in b1.flags]
    blob = "s0 " + ",".join(forms0) + " s1 " + ",".join(forms1)
    return hashlib.sha256(blob.encode()).hexdigest()


def make_solution(denominator: int, numerators) -> SolutionVectorFile:
    if denominator <= 0:
        raise ValueError("denominator must be positive")
    nums = tuple(int(_rat(v, "numerator")) for v in numerators)
    if len(nums) != VARIABLE_COUNT:
        raise ValueError("expected %d numerators, got %d"
                         % (VARIABLE_COUNT, len(nums)))
    return SolutionVectorFile(denominator, nums, order_digest())


def serialize_solution(sol: SolutionVectorFile) -> str:
    lines = ["denominator %d" % sol.denominator,
             "count %d" % len(sol.numerators),
             "order %s" % sol.digest]
    for k in range(0, len(sol.numerators), 10):
        lines.append(" ".join(str(v) for v in sol.numerators[k:k + 10]))
    return "\n".join(lines) + "\n"


def write_solution(sol: SolutionVectorFile, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_solution(sol))


def load_solution(path) -> SolutionVectorFile:
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 6 or tokens[0] != "denominator" or tokens[2] != "count" \
            or tokens[4] != "order":
        raise ValueError("malformed solution header")
    try:
        den = int(tokens[1])
        count = int(tokens[3])
    except ValueError:
        raise ValueError("non-integer header value") from None
    if den <= 0:
        raise ValueError("denominator must be positive, got %d" % den)
    if count != VARIABLE_COUNT:
        raise ValueError("expected count %d, got %d" % (VARIABLE_COUNT, count))
    digest = tokens[5]
    if digest != order_digest():
        raise ValueError("solution was written under a different flag order")
    try:
        nums = tuple(int(t) for t in tokens[6:])
    except ValueError:
        raise ValueError("non-integer numerator token") from None
    if len(nums) != count:
        raise ValueError("expected %d numerators, got %d" % (count, len(nums)))
    return SolutionVectorFile(den, nums, digest)


def _symmetric_from_upper(nums, den, n, offset):
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            v = Fraction(nums[offset + ut_index(n, i, j)], den)
            rows[i][j] = v
            rows[j][i] = v
    return tuple(tuple(r) for r in rows)


def reconstruct(sol: SolutionVectorFile):
    """Solution vector -> exact (B, Q1, Q2); Q2 is Q1 conjugated by the
    flag complement bijection."""
    b = _symmetric_from_upper(sol.numerators, sol.denominator, B_SIZE, 0)
    q1 = _symmetric_from_upper(sol.numerators, sol.denominator, Q_SIZE,
                               B_SIZE * (B_SIZE + 1) // 2)
    to2 = complement_index_map(enumerate_flags(sigma1(), 5),
                               enumerate_flags(sigma2(), 5))
    q2 = [[Fraction(0)] * Q_SIZE for _ in range(Q_SIZE)]
    for i in range(Q_SIZE):
        for j in range(Q_SIZE):
            q2[to2[i]][to2[j]] = q1[i][j]
    return b, q1, tuple(tuple(r) for r in q2)


def _integer_grid(mat, den):
    out = []
    for row in mat:
        out.append([int(_rat(v) * den) for v in row])
    return out


def compute_bound(matrices, problem: ReducedProblem) -> Certificate:
    """Exact slacks b_t - <A0_t, B> - <A1_t, Q1>; the minimum is the
    scaled bound and the minimizers form the tight set."""
    b_mat, q1 = matrices[0], matrices[1]
    if len(b_mat) != B_SIZE or len(q1) != Q_SIZE:
        raise ValueError("matrix dimensions do not match the problem")
    den = 1
    for mat in (b_mat, q1):
        for row in mat:
            for v in row:
                den = lcm(den, _rat(v).denominator)
    bn = _integer_grid(b_mat, den)
    qn = _integer_grid(q1, den)
    slacks = []
    for t in range(len(problem.reps)):
        s = 0
        for (i, j), a in problem.a0[t].items():
            s += a * bn[i][j] * (1 if i == j else 2)
        for (i, j), a in problem.a1[t].items():
            s += a * qn[i][j] * (1 if i == j else 2)
        if _POISON:
            _rat(s, "slack accumulator")
        slacks.append(problem.b[t] - Fraction(s, den))
    bound_scaled = min(slacks)
    tight = tuple(t for t, v in enumerate(slacks) if v == bound_scaled)
    return Certificate(bound_scaled, bound_scaled / problem.scaling.M,
                       tuple(slacks), tight)


def psd_check(mx) -> PsdWitness:
    """Fraction-free LDL^T with complete diagonal pivoting.

    PSD iff every chosen pivot (a leading principal minor of the
    permuted, integer-scaled matrix) is positive and, once no positive
    diagonal remains, the whole remaining submatrix is zero.
    """
    n = len(mx)
    for i, row in enumerate(mx):
        if len(row) != n:
            raise ValueError("matrix is not square")
        for j in range(n):
            if _rat(row[j]) != _rat(mx[j][i]):
                raise ValueError("matrix is not symmetric at (%d, %d)" % (i, j))
    scale = 1
    for row in mx:
        for v in row:
            scale = lcm(scale, v.denominator if isinstance(v, Fraction) else 1)
    w = [[int(v * scale) for v in row] for row in mx]
    order = list(range(n))
    perm = []
    pivots = []
    prev = 1
    for step in range(n):
        rest = order[step:]
        if _POISON:
            for r in rest:
                _rat(w[r][r], "pivot candidate")
        best = max(rest, key=lambda r: (w[r][r], -r))
        d = w[best][best]
        if d < 0:
            return PsdWitness(False, n, scale, tuple(perm), tuple(pivots),
                              len(pivots),
                              "negative pivot minor at original index %d "
                              "after %d steps" % (best, step), d)
        if d == 0:
            for a in rest:
                for b in rest:
                    if w[a][b] != 0:
                        return PsdWitness(
                            False, n, scale, tuple(perm), tuple(pivots),
                            len(pivots),
                            "zero diagonal with nonzero entry at original "
                            "(%d, %d)" % (a, b), w[a][b])
            return PsdWitness(True, n, scale, tuple(perm), tuple(pivots),
                              len(pivots))
        bi = order.index(best)
        order[step], order[bi] = best, order[step]
        perm.append(best)
        pivots.append(d)
        tail = order[step + 1:]
        for a in tail:
            wa, wb = w[a], w[best]
            fa = wa[best]
            for b in tail:
                q, r = divmod(d * wa[b] - fa * wb[b], prev)
                if r:
                    raise AssertionError("inexact fraction-free division")
                wa[b] = q
        prev = d
    return PsdWitness(True, n, scale, tuple(perm), tuple(pivots), len(pivots))


def _quad_masks(g: Graph):
    cliques, independents = [], []
    for quad in combinations(range(g.n), 4):
        edges = sum(g.has_edge(a, b) for a, b in combinations(quad, 2))
        if edges == 6:
            cliques.append(sum(1 << v for v in quad))
        elif edges == 0:
            independents.append(sum(1 << v for v in quad))
    return cliques, independents


def property_a(g: Graph) -> bool:
    """No complete and no empty quadruple share a vertex."""
    cliques, independents = _quad_masks(g)
    return not any(c & e for c in cliques for e in independents)


def _spans(g: Graph, mask: int, want_edges: bool) -> bool:
    verts = [v for v in range(g.n) if mask >> v & 1]
    return all(g.has_edge(a, b) == want_edges
               for a, b in combinations(verts, 2))


def property_b(g: Graph) -> bool:
    """Complete quadruples sharing a vertex span a clique, and empty
    quadruples sharing a vertex span an independent set."""
    cliques, independents = _quad_masks(g)
    for group, want in ((cliques, True), (independents, False)):
        for m1, m2 in combinations(group, 2):
            if m1 & m2 and not _spans(g, m1 | m2, want):
                return False
    return True


def inspect_tight_set(tight_graphs) -> tuple:
    return tuple(Inspection(canonical_form(g).code, property_a(g),
                            property_b(g)) for g in tight_graphs)


def verify_solution(sol: SolutionVectorFile, problem: ReducedProblem,
                    classes=None) -> Certificate:
    """Full check: exact slacks, PSD of all three blocks, inspections."""
    if classes is None:
        classes = enumerate_admissible(7)
    b_mat, q1, q2 = reconstruct(sol)
    cert = compute_bound((b_mat, q1), problem)
    witnesses = (psd_check(b_mat), psd_check(q1), psd_check(q2))
    graphs = [classes[problem.reps[t]] for t in cert.tight_set]
    return replace(cert, psd_witnesses=witnesses,
                   inspections=inspect_tight_set(graphs))


def render_certificate(cert: Certificate) -> str:
    names = ("B", "Q1", "Q2")
    out = []
    ok = all(w.ok for w in cert.psd_witnesses) if cert.psd_witnesses else False
    out.append("bound = %s (scaled %s)" % (cert.bound, cert.bound_scaled))
    out.append("tight classes: %d complement pairs" % len(cert.tight_set))
    for name, w in zip(names, cert.psd_witnesses):
        if w.ok:
            out.append("%s: positive semidefinite, rank %d" % (name, w.rank))
        else:
            out.append("%s: NOT positive semidefinite (%s, value %d)"
                       % (name, w.failure, w.failure_value))
    bad = [i for i in cert.inspections if not (i.property_a and i.property_b)]
    out.append("tight-set inspections: %d/%d pass A and B"
               % (len(cert.inspections) - len(bad), len(cert.inspections)))
    out.append("")
    out.append("-- machine --")
    out.append("bound %s" % cert.bound)
    out.append("bound_scaled %s" % cert.bound_scaled)
    out.append("psd_ok %d" % int(ok))
    for name, w in zip(names, cert.psd_witnesses):
        out.append("psd %s %d rank %d" % (name, int(w.ok), w.rank))
    out.append("tight_pairs %d" % len(cert.tight_set))
    out.append("depicted_pairs 51")
    for ins in cert.inspections:
        out.append("tight %x A %d B %d"
                   % (ins.code, int(ins.property_a), int(ins.property_b)))
    return "\n".join(out) + "\n"
