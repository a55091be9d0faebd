"""Types, flags, and flag bases.

A type sigma is an admissible graph whose k vertices carry the labels
1..k.  A sigma-flag on l vertices is an admissible graph together with an
injective labeling of 1..k that induces sigma label-for-label; flag
isomorphisms must respect the labeling pointwise.  F^sigma_l, the set of
flag-isomorphism classes, is enumerated by running over every admissible
graph on l vertices and every labeling that induces sigma, deduplicating
by an exact flag canonical form.

The canonical form fixes the labeled vertices first, in label order, and
brute-forces the (l-k)! orderings of the unlabeled rest, taking the
minimal adjacency bitstring; with l-k <= 4 throughout the pipeline this
is at most 24 orderings.  Basis order is ascending canonical form and is
the index contract for every matrix downstream.

Presets: sigma0 is the single labeled vertex, sigma1 the path 1-2-3,
sigma2 its complement (the single edge 13).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .graphs import (CanonicalForm, Graph, canonical_form, complement,
                     enumerate_admissible, graph_from_code, induced_subgraph,
                     is_admissible)

__all__ = [
    "TypeGraph",
    "Flag",
    "FlagBasis",
    "flag_canonical_form",
    "enumerate_flags",
    "complement_flag",
    "complement_index_map",
    "sigma0",
    "sigma1",
    "sigma2",
]


@dataclass(frozen=True)
class TypeGraph:
    """An admissible graph on vertices 0..k-1 carrying labels 1..k."""

    graph: Graph

    def __post_init__(self):
        if self.graph.n > 0 and not is_admissible(self.graph):
            raise ValueError("type graph is not admissible")

    @property
    def k(self) -> int:
        return self.graph.n


@dataclass(frozen=True)
class Flag:
    """labeling[t] is the vertex of graph carrying label t+1."""

    graph: Graph
    labeling: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labeling", tuple(self.labeling))
        if len(set(self.labeling)) != len(self.labeling):
            raise ValueError("labeling is not injective")
        for v in self.labeling:
            if not 0 <= v < self.graph.n:
                raise ValueError("labeled vertex %d out of range" % v)

    @property
    def k(self) -> int:
        return len(self.labeling)

    def type_graph(self) -> TypeGraph:
        # read the labeled vertices in label order, not vertex order
        k = self.k
        rows = [0] * k
        for a in range(k):
            for b in range(k):
                if a != b and self.graph.has_edge(self.labeling[a], self.labeling[b]):
                    rows[a] |= 1 << b
        return TypeGraph(Graph(k, tuple(rows)))

    def induces(self, sigma: TypeGraph) -> bool:
        if self.k != sigma.k:
            return False
        g, lab = self.graph, self.labeling
        sg = sigma.graph
        return all(g.has_edge(lab[a], lab[b]) == sg.has_edge(a, b)
                   for a in range(self.k) for b in range(a + 1, self.k))


def flag_canonical_form(f: Flag) -> CanonicalForm:
    """Minimal bitstring over orderings that keep labels 1..k in front."""
    n = f.graph.n
    if n > 8:
        raise ValueError("flag canonical form supports n <= 8, got %d" % n)
    adj = f.graph.adj
    fixed = f.labeling
    rest = [v for v in range(n) if v not in fixed]
    best = None
    for tail in itertools.permutations(rest):
        order = fixed + tail
        code = 0
        for c in range(1, n):
            vc = order[c]
            row = adj[vc]
            for r in range(c):
                code = code << 1 | (row >> order[r] & 1)
        if best is None or code < best:
            best = code
    return CanonicalForm(n, 0 if best is None else best)


def canonical_flag(form: CanonicalForm, k: int) -> Flag:
    """The representative flag: labels sit on vertices 0..k-1 in order."""
    return Flag(graph_from_code(form.n, form.code), tuple(range(k)))


@dataclass(frozen=True)
class FlagBasis:
    sigma: TypeGraph
    l: int
    flags: tuple[Flag, ...]

    def __len__(self) -> int:
        return len(self.flags)

    def index_of_code(self, code: int) -> int:
        return self._lookup()[code]

    def index_of(self, f: Flag) -> int:
        return self._lookup()[flag_canonical_form(f).code]

    def _lookup(self) -> dict:
        d = getattr(self, "_lookup_cache", None)
        if d is None:
            d = {flag_canonical_form(f).code: i for i, f in enumerate(self.flags)}
            object.__setattr__(self, "_lookup_cache", d)
        return d


@lru_cache(maxsize=None)
def _enumerate_flags_cached(sigma_code: int, k: int, l: int) -> FlagBasis:
    sigma = TypeGraph(graph_from_code(k, sigma_code))
    found = {}
    for g in enumerate_admissible(l):
        for lab in itertools.permutations(range(l), sigma.k):
            f = Flag(g, lab)
            if f.induces(sigma):
                form = flag_canonical_form(f)
                found.setdefault(form.code, form)
    forms = sorted(found.values())
    flags = tuple(canonical_flag(fm, sigma.k) for fm in forms)
    for f in flags:
        assert f.induces(sigma) and is_admissible(f.graph)
    return FlagBasis(sigma, l, flags)


def enumerate_flags(sigma: TypeGraph, l: int) -> FlagBasis:
    """All sigma-flags on l vertices, ascending canonical order."""
    if not sigma.k <= l <= 8:
        raise ValueError("need |sigma| <= l <= 8")
    return _enumerate_flags_cached(canonical_sigma_code(sigma), sigma.k, l)


def canonical_sigma_code(sigma: TypeGraph) -> int:
    # types are labeled, so the raw identity-order code is the right key
    g = sigma.graph
    code = 0
    for c in range(1, g.n):
        for r in range(c):
            code = code << 1 | (g.adj[c] >> r & 1)
    return code


def complement_flag(f: Flag) -> Flag:
    return Flag(complement(f.graph), f.labeling)


def complement_index_map(src: FlagBasis, dst: FlagBasis) -> tuple[int, ...]:
    """For each flag index in src, the dst index of its complement flag."""
    out = []
    for f in src.flags:
        out.append(dst.index_of(complement_flag(f)))
    return tuple(out)


def sigma0() -> TypeGraph:
    return TypeGraph(Graph.empty(1))


def sigma1() -> TypeGraph:
    return TypeGraph(Graph.from_edges(3, [(0, 1), (1, 2)]))


def sigma2() -> TypeGraph:
    return TypeGraph(Graph.from_edges(3, [(0, 2)]))
