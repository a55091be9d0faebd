"""Exact densities, expectation tables, the objective f, coefficients c_H.

Everything here is exact rational arithmetic; no floating point enters at
any stage.  The objective is f(G) = p(K4,G) + p(K4bar,G), and the key
product for the semidefinite step is the table of expectations

    D^sigma_H[i][j] = E over injective theta: [k] -> V(H) of
                      p(F_i, F_j; (H,theta)),

with theta's that fail to induce sigma contributing zero.  Tables are
computed at the minimal size v(H) = 2l - |sigma| = 7, where the free
vertices split into two halves and the joint density degenerates to a
partition count; the general-size joint density below exists to validate
that degeneration and the chain-rule limit on growing graphs.

Counts are accumulated as integers per class and divided once at the end,
so the table build performs very few rational reductions.  Induced flag
canonical forms are memoized on their raw bit encoding, which is shared
across classes and labelings.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from .flags import Flag, FlagBasis, TypeGraph, flag_canonical_form
from .graphs import Graph, canonical_form, enumerate_admissible, graph_from_code

__all__ = [
    "Rational",
    "PairDensityTable",
    "CoefficientVector",
    "subgraph_density",
    "objective_f",
    "flag_density",
    "joint_density",
    "pair_density_table",
    "coefficient_c",
    "averaging_identity_check",
    "local_density",
    "dump_table",
]

Rational = Fraction

ZERO = Fraction(0)


def _induced_code(g: Graph, verts) -> int:
    # raw column-major upper-triangle code of g[verts], verts ascending
    adj = g.adj
    code = 0
    for c in range(1, len(verts)):
        row = adj[verts[c]]
        for r in range(c):
            code = code << 1 | (row >> verts[r] & 1)
    return code


@lru_cache(maxsize=None)
def _canonical_of_raw(n: int, raw: int) -> int:
    return canonical_form(graph_from_code(n, raw)).code


@lru_cache(maxsize=None)
def _flag_canonical_of_raw(n: int, raw: int, labeling: tuple) -> int:
    return flag_canonical_form(Flag(graph_from_code(n, raw), labeling)).code


def _induced_flag_code(g: Graph, theta, extra) -> int:
    """Canonical code of the flag (g[Im(theta) + extra], theta)."""
    verts = sorted(set(theta) | set(extra))
    pos = {v: t for t, v in enumerate(verts)}
    labeling = tuple(pos[v] for v in theta)
    return _flag_canonical_of_raw(len(verts), _induced_code(g, verts), labeling)


def subgraph_density(h: Graph, g: Graph) -> Fraction:
    """p(h,g): fraction of v(h)-subsets of V(g) inducing a copy of h."""
    if h.n > g.n:
        raise ValueError("v(h) must not exceed v(g)")
    target = canonical_form(h).code
    hits = 0
    for verts in itertools.combinations(range(g.n), h.n):
        if _canonical_of_raw(h.n, _induced_code(g, verts)) == target:
            hits += 1
    return Fraction(hits, comb(g.n, h.n))


def _monotone4_counts(g: Graph) -> tuple[int, int]:
    # (cliques, independent sets) of size 4, by direct bitmask tests
    adj = g.adj
    cliques = independents = 0
    for a, b, c, d in itertools.combinations(range(g.n), 4):
        ab = adj[a] >> b & 1
        ac = adj[a] >> c & 1
        ad = adj[a] >> d & 1
        bc = adj[b] >> c & 1
        bd = adj[b] >> d & 1
        cd = adj[c] >> d & 1
        s = ab + ac + ad + bc + bd + cd
        if s == 6:
            cliques += 1
        elif s == 0:
            independents += 1
    return cliques, independents


def objective_f(h: Graph) -> Fraction:
    """f(h) = p(K4,h) + p(K4bar,h)."""
    if h.n < 4:
        raise ValueError("objective needs at least 4 vertices")
    cl, ind = _monotone4_counts(h)
    return Fraction(cl + ind, comb(h.n, 4))


def local_density(g: Graph, x: int) -> Fraction:
    """f(x,g): the objective restricted to quadruples through vertex x."""
    if g.n < 4:
        raise ValueError("needs at least 4 vertices")
    if not 0 <= x < g.n:
        raise IndexError("vertex out of range")
    adj = g.adj
    hits = 0
    others = [v for v in range(g.n) if v != x]
    for a, b, c in itertools.combinations(others, 3):
        s = (adj[x] >> a & 1) + (adj[x] >> b & 1) + (adj[x] >> c & 1) \
            + (adj[a] >> b & 1) + (adj[a] >> c & 1) + (adj[b] >> c & 1)
        if s == 6 or s == 0:
            hits += 1
    return Fraction(hits, comb(g.n - 1, 3))


def _check_same_type(f1: Flag, f2: Flag):
    if f1.k != f2.k or f1.type_graph() != f2.type_graph():
        raise ValueError("flags have different types")


def flag_density(f: Flag, k: Flag) -> Fraction:
    """p(f,k): over l-sets U containing the root, Pr[(k[U],theta) = f]."""
    if f.k != k.k:
        raise ValueError("labeling arity mismatch")
    if k.graph.n < f.graph.n:
        return ZERO
    if k.type_graph() != f.type_graph():
        return ZERO
    target = flag_canonical_form(f).code
    theta = k.labeling
    free = [v for v in range(k.graph.n) if v not in theta]
    take = f.graph.n - f.k
    hits = 0
    for extra in itertools.combinations(free, take):
        if _induced_flag_code(k.graph, theta, extra) == target:
            hits += 1
    return Fraction(hits, comb(len(free), take))


def joint_density(f1: Flag, f2: Flag, k: Flag) -> Fraction:
    """p(f1,f2;k) over ordered (U,U') with U cap U' = root, exact.

    Works at any v(k) >= l + l' - |sigma|.  The second-set counts are
    aggregated by inclusion-exclusion over root-free subsets, so growing
    graphs stay tractable.
    """
    _check_same_type(f1, f2)
    if f1.k != k.k:
        raise ValueError("labeling arity mismatch")
    a = f1.graph.n - f1.k
    b = f2.graph.n - f2.k
    n_free = k.graph.n - k.k
    if n_free < a + b:
        raise ValueError("v(k) too small for the joint density")
    if k.type_graph() != f1.type_graph():
        return ZERO
    theta = k.labeling
    free = [v for v in range(k.graph.n) if v not in theta]
    t1 = flag_canonical_form(f1).code
    t2 = flag_canonical_form(f2).code
    match1 = [U for U in itertools.combinations(free, a)
              if _induced_flag_code(k.graph, theta, U) == t1]
    match2 = [U for U in itertools.combinations(free, b)
              if _induced_flag_code(k.graph, theta, U) == t2]
    # N[S] = how many U' in match2 contain S, for every nonempty S
    superset_count = Counter()
    for U2 in match2:
        for r in range(1, b + 1):
            for S in itertools.combinations(U2, r):
                superset_count[S] += 1
    favorable = 0
    total2 = len(match2)
    for U in match1:
        touching = 0
        for r in range(1, a + 1):
            sign = 1 if r % 2 == 1 else -1
            for S in itertools.combinations(U, r):
                touching += sign * superset_count.get(S, 0)
        favorable += total2 - touching
    return Fraction(favorable, comb(n_free, a) * comb(n_free - a, b))


@dataclass(frozen=True)
class PairDensityTable:
    """Expectation tables E_theta[p(F_i,F_j;(H,theta))], one per class.

    entries[h] is a sparse upper-triangle map (i,j) -> Rational with
    i <= j; absent pairs are zero and the matrix is symmetric by
    construction.  matrix(h) densifies for tests and small consumers.
    """

    sigma_index: int
    size: int
    entries: dict

    def value(self, h: int, i: int, j: int) -> Fraction:
        if i > j:
            i, j = j, i
        return self.entries.get(h, {}).get((i, j), ZERO)

    def matrix(self, h: int) -> list:
        m = [[ZERO] * self.size for _ in range(self.size)]
        for (i, j), v in self.entries.get(h, {}).items():
            m[i][j] = v
            m[j][i] = v
        return m


@dataclass(frozen=True)
class CoefficientVector:
    values: tuple


def pair_density_table(sigma: TypeGraph, basis: FlagBasis,
                       classes: list, sigma_index: int = -1) -> PairDensityTable:
    """Tables at minimal size: v(H) = 2*basis.l - |sigma| for every H."""
    k = sigma.k
    l = basis.l
    nh = 2 * l - k
    for h in classes:
        if h.n != nh:
            raise ValueError("class size %d does not match 2l-|sigma| = %d"
                             % (h.n, nh))
    lookup = {flag_canonical_form(f).code: i for i, f in enumerate(basis.flags)}
    sg = sigma.graph
    denom = 1
    for t in range(k):
        denom *= nh - t
    denom *= comb(nh - k, l - k)
    entries = {}
    for h_idx, H in enumerate(classes):
        counts = Counter()
        adj = H.adj
        for theta in itertools.permutations(range(nh), k):
            ok = True
            for a in range(k):
                for b in range(a + 1, k):
                    if (adj[theta[a]] >> theta[b] & 1) != (sg.adj[a] >> b & 1):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            free = [v for v in range(nh) if v not in theta]
            idx = {}
            for U in itertools.combinations(free, l - k):
                idx[U] = lookup[_induced_flag_code(H, theta, U)]
            for U, i in idx.items():
                rest = tuple(v for v in free if v not in U)
                j = idx[rest]
                counts[(i, j) if i <= j else (j, i)] += 1
        # each unordered {U,U'} was visited from both sides, so an
        # off-diagonal count is twice the ordered count A_ij
        entries[h_idx] = {ij: Fraction(c, denom if ij[0] == ij[1] else 2 * denom)
                          for ij, c in counts.items()}
    return PairDensityTable(sigma_index, len(basis), entries)


def coefficient_c(tables: list, qmats: list) -> CoefficientVector:
    """c_H = sum over types of <Q, D_H>, full-matrix inner products."""
    if len(tables) != len(qmats):
        raise ValueError("one Q matrix per table required")
    nclasses = 0
    for tab, q in zip(tables, qmats):
        if len(q) != tab.size or any(len(row) != tab.size for row in q):
            raise ValueError("Q dimension does not match flag basis size")
        nclasses = max(nclasses, 1 + max(tab.entries, default=-1))
    values = []
    for h in range(nclasses):
        total = ZERO
        for tab, q in zip(tables, qmats):
            for (i, j), v in tab.entries.get(h, {}).items():
                total += q[i][j] * v if i == j else 2 * q[i][j] * v
        values.append(total)
    return CoefficientVector(tuple(values))


def class_counts(g: Graph, l: int) -> Counter:
    """How many l-subsets of g induce each admissible class (by index)."""
    classes = enumerate_admissible(l)
    index_of = {canonical_form(h).code: i for i, h in enumerate(classes)}
    counts = Counter()
    for verts in itertools.combinations(range(g.n), l):
        counts[index_of[_canonical_of_raw(l, _induced_code(g, verts))]] += 1
    return counts


def averaging_identity_check(g: Graph, l: int) -> tuple[Fraction, Fraction]:
    """Return (f(g), sum over H in M_l of f(H) p(H,g)); they must agree."""
    if not 4 <= l <= g.n or l > 8:
        raise ValueError("need 4 <= l <= min(v(g), 8)")
    classes = enumerate_admissible(l)
    counts = class_counts(g, l)
    total = comb(g.n, l)
    rhs = ZERO
    for idx, cnt in counts.items():
        rhs += objective_f(classes[idx]) * Fraction(cnt, total)
    return objective_f(g), rhs


def dump_table(table: PairDensityTable) -> str:
    """Text fixture: lines "H_index i j numerator/denominator", sorted."""
    lines = []
    for h in sorted(table.entries):
        for (i, j) in sorted(table.entries[h]):
            v = table.entries[h][(i, j)]
            lines.append("%d %d %d %d/%d" % (h, i, j, v.numerator, v.denominator))
    return "\n".join(lines) + "\n"
