from __future__ import annotations

import itertools
import random

import pytest

from flagcert.extremal import (brute_force_minimum, count_monotone4,
                               enumerate_W3, extremal_report,
                               lower_bound_formula, mk_formula, tau_k,
                               turan_graph)
from flagcert.graphs import Permutation, canonical_form, complement, \
    representation_graph


def test_tau_examples():
    assert tau_k(12, 3).image == (9, 10, 11, 12, 5, 6, 7, 8, 1, 2, 3, 4)
    assert tau_k(5, 1).image == (1, 2, 3, 4, 5)
    assert tau_k(5, 5).image == (5, 4, 3, 2, 1)
    assert tau_k(7, 3).image == (5, 6, 7, 3, 4, 1, 2)
    with pytest.raises(ValueError):
        tau_k(2, 3)


def test_count_monotone4_small():
    assert count_monotone4(Permutation((1, 2, 3, 4))).increasing == 1
    assert count_monotone4(Permutation((4, 3, 2, 1))).decreasing == 1
    mc = count_monotone4(Permutation((2, 1, 4, 3)))
    assert mc.total == 0
    with pytest.raises(ValueError):
        count_monotone4(Permutation((2, 1, 3)))


def test_count_symmetries():
    rng = random.Random(107)
    for _ in range(25):
        img = list(range(1, rng.randint(5, 9) + 1))
        rng.shuffle(img)
        p = Permutation(tuple(img))
        mc = count_monotone4(p)
        rev = count_monotone4(p.reverse())
        cmpl = count_monotone4(p.complement_values())
        assert (mc.increasing, mc.decreasing) == (rev.decreasing, rev.increasing)
        assert (mc.increasing, mc.decreasing) == (cmpl.decreasing, cmpl.increasing)
        assert mc.total == rev.total == cmpl.total


def test_closed_form_matches_exhaustive_count():
    for n in range(4, 31):
        assert count_monotone4(tau_k(n, 3)).total == mk_formula(n, 3)
        assert mk_formula(n, 3) == lower_bound_formula(n)
    assert mk_formula(12, 3) == 3
    assert mk_formula(17, 3) == 35
    with pytest.raises(ValueError):
        mk_formula(2, 3)
    with pytest.raises(ValueError):
        lower_bound_formula(3)


def test_lower_bound_formula_far_range():
    for n in range(4, 201):
        assert lower_bound_formula(n) == mk_formula(n, 3)


def test_w3_counts():
    assert len(enumerate_W3(15)) == 1250
    assert len(enumerate_W3(17)) == 3750
    with pytest.raises(ValueError):
        enumerate_W3(14)


def test_w3_members_verified():
    rng = random.Random(109)
    fam = enumerate_W3(16)
    assert len(fam) == 2 * 5 ** 4 * 3
    want = lower_bound_formula(16)
    for p in rng.sample(fam, 12):
        mc = count_monotone4(p)
        assert mc.total == want
        assert mc.increasing == 0 or mc.decreasing == 0


def test_w3_closed_under_reversal():
    fam = {p.image for p in enumerate_W3(15)}
    for img in itertools.islice(fam, 100):
        assert img[::-1] in fam


def test_depicted_extremal_permutation():
    img = (6, 5, 3, 13, 2, 1, 10, 9, 8, 17, 7, 4, 16, 15, 14, 12, 11)
    fam = {p.image for p in enumerate_W3(17)}
    assert img in fam
    mc = count_monotone4(Permutation(img))
    assert mc.increasing == 0 and mc.decreasing == 35


def _part_sizes(g) -> list:
    # complement components; identifies a complete multipartite graph
    c = complement(g)
    seen, parts = set(), []
    for v in range(g.n):
        if v in seen:
            continue
        stack, comp = [v], set()
        while stack:
            u = stack.pop()
            if u in comp:
                continue
            comp.add(u)
            stack.extend(w for w in range(g.n) if c.has_edge(u, w))
        seen |= comp
        parts.append(len(comp))
        for a in comp:
            for b in comp:
                assert a == b or not g.has_edge(a, b)
        for w in range(g.n):
            if w not in comp:
                assert all(g.has_edge(a, w) for a in comp)
    return sorted(parts)


def test_tau3_realizes_the_turan_graph():
    for n in (7, 8, 9, 12, 16):
        g = representation_graph(tau_k(n, 3))
        assert _part_sizes(g) == _part_sizes(turan_graph(n))
    assert canonical_form(representation_graph(tau_k(7, 3))) == \
        canonical_form(turan_graph(7))


def test_turan_graph_structure():
    t = turan_graph(12)
    # complement splits into three cliques of size four
    c = complement(t)
    comp = {frozenset([v] + [w for w in range(12) if c.has_edge(v, w)])
            for v in range(12)}
    assert sorted(len(s) for s in comp) == [4, 4, 4]
    with pytest.raises(ValueError):
        turan_graph(0)


def test_brute_force_against_exhaustive_search():
    for n in (4, 5, 6, 7):
        best = min(count_monotone4(Permutation(img)).total
                   for img in itertools.permutations(range(1, n + 1)))
        assert brute_force_minimum(n) == best
        assert best == lower_bound_formula(n)


def test_brute_force_bounds():
    assert brute_force_minimum(3) == 0
    assert brute_force_minimum(8) == 0
    with pytest.raises(ValueError):
        brute_force_minimum(11)


def test_extremal_report_format():
    text = extremal_report([8, 15])
    lines = text.splitlines()
    assert lines[0] == "n,formula,brute_force,w3_count"
    assert lines[1] == "8,0,0,"
    assert lines[2] == "15,15,,1250"
