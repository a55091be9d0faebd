from __future__ import annotations

import itertools
import random
from fractions import Fraction
from math import comb

import pytest

from flagcert.density import (CoefficientVector, averaging_identity_check,
                              class_counts, coefficient_c, dump_table,
                              flag_density, joint_density, local_density,
                              objective_f, pair_density_table,
                              subgraph_density)
from flagcert.extremal import turan_graph
from flagcert.flags import Flag, enumerate_flags, sigma0, sigma1
from flagcert.graphs import (Graph, Permutation, enumerate_admissible,
                             representation_graph)


def _random_admissible(rng: random.Random, n: int) -> Graph:
    img = list(range(1, n + 1))
    rng.shuffle(img)
    return representation_graph(Permutation(tuple(img)))


def test_subgraph_density_basics():
    rng = random.Random(71)
    for _ in range(10):
        g = _random_admissible(rng, rng.randint(4, 7))
        assert subgraph_density(g, g) == 1
    with pytest.raises(ValueError):
        subgraph_density(Graph.complete(5), Graph.complete(4))
    # densities over all classes of one size sum to 1
    g = _random_admissible(rng, 7)
    total = sum(subgraph_density(h, g) for h in enumerate_admissible(5))
    assert total == 1


def test_subgraph_density_on_turan_graph():
    t12 = turan_graph(12)
    assert subgraph_density(Graph.complete(4), t12) == 0
    assert subgraph_density(Graph.empty(4), t12) == Fraction(1, 165)
    assert subgraph_density(Graph.complete(3), t12) == \
        Fraction(4 * 4 * 4, comb(12, 3))


def test_objective_examples():
    assert objective_f(Graph.complete(7)) == 1
    assert objective_f(Graph.empty(7)) == 1
    assert objective_f(turan_graph(7)) == 0
    assert objective_f(turan_graph(12)) == Fraction(3, 495)
    with pytest.raises(ValueError):
        objective_f(Graph.complete(3))


def test_objective_agrees_with_density_sum():
    rng = random.Random(73)
    k4, e4 = Graph.complete(4), Graph.empty(4)
    for _ in range(15):
        g = _random_admissible(rng, rng.randint(4, 8))
        assert objective_f(g) == subgraph_density(k4, g) + subgraph_density(e4, g)


def test_local_density():
    assert local_density(Graph.complete(7), 3) == 1
    t12 = turan_graph(12)
    for x in range(12):
        assert local_density(t12, x) == Fraction(1, 165)
    with pytest.raises(IndexError):
        local_density(t12, 12)
    # averaging local densities recovers the global objective exactly
    rng = random.Random(79)
    for _ in range(10):
        g = _random_admissible(rng, 7)
        avg = sum(local_density(g, x) for x in range(7)) / 7
        assert avg == objective_f(g)


def test_flag_density_identity_and_zero():
    b1 = enumerate_flags(sigma1(), 5)
    for f in b1.flags[:8]:
        assert flag_density(f, f) == 1
    f, g = b1.flags[0], b1.flags[1]
    assert flag_density(f, g) == 0
    with pytest.raises(ValueError):
        flag_density(Flag(Graph.empty(2), (0,)), Flag(Graph.empty(2), (0, 1)))


def test_joint_density_by_direct_enumeration():
    rng = random.Random(83)
    b0 = enumerate_flags(sigma0(), 2)
    for _ in range(12):
        k_graph = _random_admissible(rng, rng.randint(4, 6))
        root = rng.randrange(k_graph.n)
        k = Flag(k_graph, (root,))
        free = [v for v in range(k_graph.n) if v != root]
        for f1 in b0.flags:
            for f2 in b0.flags:
                want_edge1 = f1.graph.edge_count() == 1
                want_edge2 = f2.graph.edge_count() == 1
                hits = 0
                for u in free:
                    for w in free:
                        if u == w:
                            continue
                        if k_graph.has_edge(root, u) == want_edge1 \
                                and k_graph.has_edge(root, w) == want_edge2:
                            hits += 1
                expect = Fraction(hits, len(free) * (len(free) - 1))
                assert joint_density(f1, f2, k) == expect


def test_joint_density_rows_sum_to_one():
    rng = random.Random(89)
    b0 = enumerate_flags(sigma0(), 2)
    g = _random_admissible(rng, 5)
    k = Flag(g, (2,))
    total = sum(joint_density(f1, f2, k)
                for f1 in b0.flags for f2 in b0.flags)
    assert total == 1
    with pytest.raises(ValueError):
        joint_density(b0.flags[0], b0.flags[1], Flag(Graph.empty(2), (0,)))


def _toy_table():
    basis = enumerate_flags(sigma0(), 2)
    classes = enumerate_admissible(3)
    return pair_density_table(sigma0(), basis, classes, 0), classes


def test_pair_density_table_toy_values():
    table, classes = _toy_table()
    # classes in canonical order: empty, one edge, path, triangle
    assert [g.edge_count() for g in classes] == [0, 1, 2, 3]
    assert table.entries[0] == {(0, 0): Fraction(1)}
    assert table.entries[1] == {(0, 0): Fraction(1, 3), (0, 1): Fraction(1, 3)}
    assert table.entries[2] == {(1, 1): Fraction(1, 3), (0, 1): Fraction(1, 3)}
    assert table.entries[3] == {(1, 1): Fraction(1)}
    assert table.value(1, 1, 0) == Fraction(1, 3)
    assert table.value(1, 1, 1) == 0
    m = table.matrix(2)
    assert m[0][1] == m[1][0] == Fraction(1, 3)


def test_pair_density_table_rejects_wrong_class_size():
    basis = enumerate_flags(sigma0(), 2)
    with pytest.raises(ValueError):
        pair_density_table(sigma0(), basis, [Graph.empty(4)], 0)


def test_pair_density_tables_sum_to_one_per_class():
    # ordered pair densities over a full split partition the probability
    basis = enumerate_flags(sigma0(), 3)
    classes = enumerate_admissible(5)
    table = pair_density_table(sigma0(), basis, classes, 0)
    for h in range(len(classes)):
        total = Fraction(0)
        for (i, j), v in table.entries[h].items():
            total += v if i == j else 2 * v
        assert total == 1


def test_pair_density_table_matches_joint_density_average():
    b1 = enumerate_flags(sigma1(), 5)
    classes7 = enumerate_admissible(7)
    rng = random.Random(97)
    picks = [classes7[rng.randrange(len(classes7))] for _ in range(2)]
    table = pair_density_table(sigma1(), b1, picks, 1)
    sg = sigma1().graph
    for h_idx, H in enumerate(picks):
        denom = 7 * 6 * 5
        for (i, j) in itertools.islice(sorted(table.entries[h_idx]), 4):
            acc = Fraction(0)
            for theta in itertools.permutations(range(7), 3):
                ok = all(H.has_edge(theta[a], theta[b]) == sg.has_edge(a, b)
                         for a in range(3) for b in range(a + 1, 3))
                if not ok:
                    continue
                k = Flag(H, theta)
                d = joint_density(b1.flags[i], b1.flags[j], k)
                if i != j:
                    d = (d + joint_density(b1.flags[j], b1.flags[i], k)) / 2
                acc += d
            assert table.value(h_idx, i, j) == acc / denom


def test_dump_table_format():
    table, _ = _toy_table()
    text = dump_table(table)
    assert text == ("0 0 0 1/1\n"
                    "1 0 0 1/3\n"
                    "1 0 1 1/3\n"
                    "2 0 1 1/3\n"
                    "2 1 1 1/3\n"
                    "3 1 1 1/1\n")


def test_coefficient_c_toy():
    table, _ = _toy_table()
    z = [[Fraction(0)] * 2 for _ in range(2)]
    assert coefficient_c([table], [z]).values == (0, 0, 0, 0)
    q = [[Fraction(1), Fraction(2)], [Fraction(2), Fraction(5)]]
    got = coefficient_c([table], [q])
    # c_H = sum_ij q_ij * entry_ij with off-diagonal doubled
    want = (Fraction(1),
            Fraction(1, 3) + 2 * Fraction(2) * Fraction(1, 3),
            Fraction(5, 3) + 2 * Fraction(2) * Fraction(1, 3),
            Fraction(5))
    assert got.values == want
    assert isinstance(got, CoefficientVector)
    with pytest.raises(ValueError):
        coefficient_c([table], [z, z])
    with pytest.raises(ValueError):
        coefficient_c([table], [[[Fraction(0)]]])


def test_class_counts_total():
    rng = random.Random(101)
    for _ in range(5):
        g = _random_admissible(rng, 8)
        for l in (4, 5):
            counts = class_counts(g, l)
            assert sum(counts.values()) == comb(8, l)


def test_averaging_identity_exact():
    rng = random.Random(103)
    for _ in range(8):
        g = _random_admissible(rng, 8)
        for l in range(4, 8):
            lhs, rhs = averaging_identity_check(g, l)
            assert lhs == rhs
    with pytest.raises(ValueError):
        averaging_identity_check(Graph.complete(5), 6)


def test_turan_chain_approaches_the_bound():
    for t in range(2, 9):
        assert objective_f(turan_graph(3 * t)) == \
            Fraction(3 * comb(t, 4), comb(3 * t, 4))
    # the closed form climbs monotonically to 1/27 from below
    prev_gap = None
    for t in range(4, 65):
        gap = Fraction(1, 27) - Fraction(3 * comb(t, 4), comb(3 * t, 4))
        assert gap > 0
        if prev_gap is not None:
            assert gap < prev_gap
        prev_gap = gap
    assert prev_gap < Fraction(1, 300)
