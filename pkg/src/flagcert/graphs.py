"""Permutations, representation graphs, canonical forms, admissibility.

The representation graph of a permutation p of [n] has vertex set
{0,..,n-1} (vertex i stands for position i+1) and an edge between i < j
exactly when p(i+1) > p(j+1), i.e. when the pair is an inversion.  A graph
is admissible when it is isomorphic to some representation graph.  The
admissible family is closed under complement (reverse the permutation),
induced subgraphs (delete entries and relabel), and cloning a vertex.

Isomorphism for n <= 8 is decided by an exact canonical form: the
lexicographically minimal upper-triangle adjacency bitstring over all n!
vertex orderings, the triangle being read column by column so that the
bits contributed by each new vertex of the ordering form one block.  The
minimum is found by a frontier search that only ever discards an ordering
prefix when another prefix provably dominates it, so the result equals
the full brute-force minimum.

Permutations are 1-based (one-line notation, images 1..n); graphs are
0-based.  Graph supports n up to 2048 so that large Turan constructions
fit; only canonical_form and is_admissible are capped at n <= 8.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "Permutation",
    "Graph",
    "CanonicalForm",
    "representation_graph",
    "canonical_form",
    "enumerate_admissible",
    "is_admissible",
    "complement",
    "induced_subgraph",
    "clone_permutation",
    "relabel",
]

MAX_CANONICAL_N = 8


@dataclass(frozen=True)
class Permutation:
    """A permutation of [n] in one-line notation: image[i] = p(i+1)."""

    image: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "image", tuple(self.image))
        n = len(self.image)
        if sorted(self.image) != list(range(1, n + 1)):
            raise ValueError("not a bijection on {1..%d}: %r" % (n, self.image))

    @property
    def n(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise IndexError("position %d out of range 1..%d" % (i, self.n))
        return self.image[i - 1]

    def reverse(self) -> "Permutation":
        return Permutation(self.image[::-1])

    def complement_values(self) -> "Permutation":
        n = self.n
        return Permutation(tuple(n + 1 - v for v in self.image))


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph; adj[i] is the neighbour set of i as a bitmask."""

    n: int
    adj: tuple[int, ...]

    def __post_init__(self):
        if self.n < 0 or self.n > 2048:
            raise ValueError("vertex count %d out of supported range" % self.n)
        if len(self.adj) != self.n:
            raise ValueError("adjacency rows do not match n")
        full = (1 << self.n) - 1
        for i, row in enumerate(self.adj):
            if row & ~full:
                raise ValueError("row %d has bits outside the vertex range" % i)
            if row >> i & 1:
                raise ValueError("loop at vertex %d" % i)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if (self.adj[i] >> j & 1) != (self.adj[j] >> i & 1):
                    raise ValueError("adjacency not symmetric at (%d,%d)" % (i, j))

    @staticmethod
    def from_edges(n: int, edges) -> "Graph":
        rows = [0] * n
        for i, j in edges:
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ValueError("bad edge (%d,%d)" % (i, j))
            rows[i] |= 1 << j
            rows[j] |= 1 << i
        return Graph(n, tuple(rows))

    @staticmethod
    def empty(n: int) -> "Graph":
        return Graph(n, (0,) * n)

    @staticmethod
    def complete(n: int) -> "Graph":
        full = (1 << n) - 1
        return Graph(n, tuple(full ^ (1 << i) for i in range(n)))

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    def degree(self, i: int) -> int:
        return (self.adj[i]).bit_count()

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n)
                if self.adj[i] >> j & 1]

    def edge_count(self) -> int:
        return sum(row.bit_count() for row in self.adj) // 2


@dataclass(frozen=True, order=True)
class CanonicalForm:
    """Iso-invariant key: minimal column-major upper-triangle bitstring."""

    n: int
    code: int

    @property
    def bytes(self) -> bytes:
        nbits = self.n * (self.n - 1) // 2
        return bytes([self.n]) + self.code.to_bytes((nbits + 7) // 8 or 1, "big")


def representation_graph(p: Permutation) -> Graph:
    """Graph on [n] with an edge at every inversion pair of p."""
    img = p.image
    n = p.n
    rows = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if img[i] > img[j]:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
    return Graph(n, tuple(rows))


def _check_canonical_size(n: int):
    if n > MAX_CANONICAL_N:
        raise ValueError("canonical form supports n <= %d, got n = %d"
                         % (MAX_CANONICAL_N, n))


def canonical_form(g: Graph) -> CanonicalForm:
    """Exact minimal-bitstring canonical form (n <= 8).

    Frontier search: level k holds every ordering prefix of length k that
    can still begin a minimal bitstring.  Prefixes whose remaining-vertex
    adjacency profiles coincide have identical continuations, so one
    representative suffices; this keeps even the all-ties case (empty or
    complete graph) polynomial without ever sacrificing exactness.
    """
    _check_canonical_size(g.n)
    n, adj = g.n, g.adj
    if n <= 1:
        return CanonicalForm(n, 0)
    code = 0
    frontier = [()]
    all_mask = (1 << n) - 1
    for level in range(n):
        min_pat = None
        extensions = []
        for chosen in frontier:
            rem = all_mask
            for u in chosen:
                rem &= ~(1 << u)
            m = rem
            while m:
                v = (m & -m).bit_length() - 1
                m &= m - 1
                row = adj[v]
                pat = 0
                for u in chosen:
                    pat = pat << 1 | (row >> u & 1)
                if min_pat is None or pat < min_pat:
                    min_pat = pat
                    extensions = [(chosen, v)]
                elif pat == min_pat:
                    extensions.append((chosen, v))
        code = code << level | min_pat
        seen = set()
        frontier = []
        for chosen, v in extensions:
            nc = chosen + (v,)
            rem = all_mask
            for u in nc:
                rem &= ~(1 << u)
            sig_rows = []
            m = rem
            while m:
                w = (m & -m).bit_length() - 1
                m &= m - 1
                row = adj[w]
                pat = 0
                for u in nc:
                    pat = pat << 1 | (row >> u & 1)
                sig_rows.append(pat)
            sig = (rem, tuple(sig_rows))
            if sig not in seen:
                seen.add(sig)
                frontier.append(nc)
    return CanonicalForm(n, code)


def _pair_order(n: int) -> list[tuple[int, int]]:
    # column-major upper triangle: the reading order behind CanonicalForm.code
    return [(r, c) for c in range(1, n) for r in range(c)]


def graph_from_code(n: int, code: int) -> Graph:
    """Rebuild the concrete graph whose identity ordering yields this code."""
    pairs = _pair_order(n)
    rows = [0] * n
    for t, (r, c) in enumerate(pairs):
        if code >> (len(pairs) - 1 - t) & 1:
            rows[r] |= 1 << c
            rows[c] |= 1 << r
    return Graph(n, tuple(rows))


def relabel(g: Graph, order) -> Graph:
    """Graph with new vertex t = old vertex order[t]."""
    order = tuple(order)
    if sorted(order) != list(range(g.n)):
        raise ValueError("order is not a vertex permutation")
    rows = [0] * g.n
    for t in range(g.n):
        row = g.adj[order[t]]
        for s in range(g.n):
            if row >> order[s] & 1:
                rows[t] |= 1 << s
    return Graph(g.n, tuple(rows))


@lru_cache(maxsize=None)
def _admissible_classes(l: int) -> tuple[tuple["Graph", ...], frozenset]:
    graphs = {}
    for img in itertools.permutations(range(1, l + 1)):
        cf = canonical_form(representation_graph(Permutation(img)))
        if cf.code not in graphs:
            graphs[cf.code] = graph_from_code(l, cf.code)
    codes = sorted(graphs)
    return tuple(graphs[c] for c in codes), frozenset(codes)


def enumerate_admissible(l: int) -> list[Graph]:
    """All iso classes of representation graphs of S_l, in canonical order.

    The returned graphs are the canonical representatives themselves (the
    identity ordering of each realizes its canonical code), sorted
    ascending by canonical form; every downstream index is pinned to this
    order.
    """
    if not 1 <= l <= MAX_CANONICAL_N:
        raise ValueError("l must be in 1..%d" % MAX_CANONICAL_N)
    return list(_admissible_classes(l)[0])


def is_admissible(g: Graph) -> bool:
    """Membership of g's iso class in the representation-graph family."""
    _check_canonical_size(g.n)
    if g.n == 0:
        return True
    return canonical_form(g).code in _admissible_classes(g.n)[1]


def complement(g: Graph) -> Graph:
    full = (1 << g.n) - 1
    return Graph(g.n, tuple((full ^ row) & ~(1 << i) for i, row in enumerate(g.adj)))


def induced_subgraph(g: Graph, u) -> Graph:
    """Subgraph on vertex set u, relative order preserved."""
    verts = sorted(set(u))
    if verts and not (0 <= verts[0] and verts[-1] < g.n):
        raise ValueError("vertex out of range")
    rows = [0] * len(verts)
    for t, v in enumerate(verts):
        row = g.adj[v]
        for s, w in enumerate(verts):
            if row >> w & 1:
                rows[t] |= 1 << s
    return Graph(len(verts), tuple(rows))


def clone_permutation(p: Permutation, k: int) -> Permutation:
    """Permutation on [n+1] whose graph adds a clone of vertex k (1-based).

    Piecewise: entries left of k keep their value, bumped by one when they
    exceed p(k); the new entry at position k+1 takes value p(k)+1; entries
    right of k shift one position and are bumped the same way.  The new
    vertex duplicates the neighbourhood of k and is non-adjacent to it.
    """
    n = p.n
    if not 1 <= k <= n:
        raise IndexError("clone position %d out of range 1..%d" % (k, n))
    pk = p(k)
    img = []
    for i in range(1, n + 2):
        if i <= k:
            v = p(i)
            img.append(v if v <= pk else v + 1)
        elif i == k + 1:
            img.append(pk + 1)
        else:
            v = p(i - 1)
            img.append(v if v < pk else v + 1)
    return Permutation(tuple(img))
