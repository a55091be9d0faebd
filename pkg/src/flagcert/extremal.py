"""Extremal constructions and brute-force oracles.

tau_k(n) stacks k decreasing blocks of increasing runs; its monotone
(k+1)-subsequence count has the closed form r*C(ceil(n/k),k+1) +
(k-r)*C(floor(n/k),k+1) with r = n mod k, conjectured minimal.  For k=3
the count also equals C(floor(n/3),4) + C(floor((n+1)/3),4) +
C(floor((n+2)/3),4).

W^3_n is the known family of minimizers for k=3 and n >= 15: reverse the
three blocks of a layered identity, then apply four local 4-element
replacements with five choices each, and close under reversal, giving
2*5^4*C(3,r) permutations.  Each one is re-verified here by exhaustive
counting rather than trusted.

brute_force_minimum exhausts S_n (n <= 10) with branch-and-bound on the
partial monotone count, pruning by the complement symmetry up front and
the reversal symmetry at the last position.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

from .graphs import Graph, Permutation

__all__ = [
    "MonotoneCount",
    "tau_k",
    "count_monotone4",
    "mk_formula",
    "lower_bound_formula",
    "enumerate_W3",
    "turan_graph",
    "brute_force_minimum",
    "extremal_report",
]


@dataclass(frozen=True)
class MonotoneCount:
    increasing: int
    decreasing: int

    @property
    def total(self) -> int:
        return self.increasing + self.decreasing


def tau_k(n: int, k: int) -> Permutation:
    """Block permutation with breakpoints t_j = floor(j*n/k)."""
    if not n >= k >= 1:
        raise ValueError("need n >= k >= 1")
    t = [j * n // k for j in range(k + 1)]
    img = []
    for j in range(k - 1, -1, -1):
        img.extend(range(t[j] + 1, t[j + 1] + 1))
    return Permutation(tuple(img))


def count_monotone4(p: Permutation) -> MonotoneCount:
    """Exhaustive count over all C(n,4) index quadruples."""
    if p.n < 4:
        raise ValueError("need n >= 4")
    inc = dec = 0
    for a, b, c, d in itertools.combinations(p.image, 4):
        if a < b < c < d:
            inc += 1
        elif a > b > c > d:
            dec += 1
    return MonotoneCount(inc, dec)


def mk_formula(n: int, k: int) -> int:
    """Closed form for the monotone-(k+1) count of tau_k(n)."""
    if n < k:
        raise ValueError("need n >= k")
    r = n % k
    return r * comb(-(-n // k), k + 1) + (k - r) * comb(n // k, k + 1)


def lower_bound_formula(n: int) -> int:
    if n < 4:
        raise ValueError("need n >= 4")
    return comb(n // 3, 4) + comb((n + 1) // 3, 4) + comb((n + 2) // 3, 4)


def _block_choices(n: int) -> list[tuple[int, int]]:
    # ordered block sizes, each floor(n/3) or floor(n/3)+1
    fl = n // 3
    out = []
    for s1 in (fl, fl + 1):
        for s2 in (fl, fl + 1):
            s3 = n - s1 - s2
            if s3 in (fl, fl + 1):
                out.append((s1, s1 + s2))
    return out


def _replace(seq: list[int], base: tuple[int, ...], repl: tuple[int, ...]) -> list[int]:
    pos = sorted(seq.index(v) for v in base)
    if tuple(seq[p] for p in pos) != base:
        raise AssertionError("recipe subsequence out of order: %r" % (base,))
    out = list(seq)
    for p, v in zip(pos, repl):
        out[p] = v
    return out


def enumerate_W3(n: int) -> list[Permutation]:
    """The known minimizer family for k=3, built literally and verified."""
    if n < 15:
        raise ValueError("recipe requires n >= 15")
    want = lower_bound_formula(n)
    results = set()
    for b1, b2 in _block_choices(n):
        base = list(range(b1, 0, -1)) + list(range(b2, b1, -1)) \
            + list(range(n, b2, -1))
        step4 = [(2, 1, b2, b2 - 1), (2, b2, 1, b2 - 1), (2, b2, b2 - 1, 1),
                 (b2, 2, 1, b2 - 1), (b2, 2, b2 - 1, 1)]
        x, y = b1 + 2, b1 + 1
        step5 = [(x, y, n, n - 1), (x, n, y, n - 1), (x, n, n - 1, y),
                 (n, x, y, n - 1), (n, x, n - 1, y)]
        step6 = [(b1, b1 - 1, b1 + 2, b1 + 1), (b1 + 1, b1 - 1, b1 + 2, b1),
                 (b1 + 2, b1 - 1, b1 + 1, b1), (b1 + 1, b1, b1 + 2, b1 - 1),
                 (b1 + 2, b1, b1 + 1, b1 - 1)]
        step7 = [(b2, b2 - 1, b2 + 2, b2 + 1), (b2 + 1, b2 - 1, b2 + 2, b2),
                 (b2 + 2, b2 - 1, b2 + 1, b2), (b2 + 1, b2, b2 + 2, b2 - 1),
                 (b2 + 2, b2, b2 + 1, b2 - 1)]
        for r4 in step4:
            s4 = _replace(base, step4[0], r4)
            for r5 in step5:
                s5 = _replace(s4, step5[0], r5)
                for r6 in step6:
                    s6 = _replace(s5, step6[0], r6)
                    for r7 in step7:
                        s7 = _replace(s6, step7[0], r7)
                        results.add(tuple(s7))
                        results.add(tuple(reversed(s7)))
    out = []
    for img in sorted(results):
        p = Permutation(img)
        mc = count_monotone4(p)
        if mc.total != want or (mc.increasing and mc.decreasing):
            raise AssertionError("recipe member fails verification: %r" % (img,))
        out.append(p)
    return out


def turan_graph(n: int) -> Graph:
    """T_3(n), parts matching the blocks of tau_3(n) (sizes within one)."""
    if n < 1:
        raise ValueError("need n >= 1")
    t = [j * n // 3 for j in range(4)]
    part = [0] * n
    for j in range(3):
        for v in range(t[j], t[j + 1]):
            part[v] = j
    rows = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if part[i] != part[j]:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
    return Graph(n, tuple(rows))


def brute_force_minimum(n: int) -> int:
    """min over S_n of the monotone-4 total, exhaustive with pruning."""
    if n > 10:
        raise ValueError("exhaustive search capped at n = 10")
    if n < 4:
        return 0
    best = comb(n, 4) + 1
    prefix: list[int] = []
    inc2 = [0] * n
    inc3 = [0] * n
    dec2 = [0] * n
    dec3 = [0] * n
    used = [False] * (n + 1)
    first_cap = (n + 1) // 2

    def place(depth: int, total: int):
        nonlocal best
        if depth == n:
            if total < best:
                best = total
            return
        last = depth == n - 1
        for x in range(1, n + 1):
            if used[x]:
                continue
            if depth == 0 and x > first_cap:
                continue
            if last and prefix[0] > x:
                continue
            i2 = i3 = i4 = 0
            d2 = d3 = d4 = 0
            for j, v in enumerate(prefix):
                if v < x:
                    i4 += inc3[j]
                    i3 += inc2[j]
                    i2 += 1
                else:
                    d4 += dec3[j]
                    d3 += dec2[j]
                    d2 += 1
            new_total = total + i4 + d4
            if new_total >= best:
                continue
            used[x] = True
            prefix.append(x)
            inc2[depth], inc3[depth] = i2, i3
            dec2[depth], dec3[depth] = d2, d3
            place(depth + 1, new_total)
            prefix.pop()
            used[x] = False

    place(0, 0)
    return best


def extremal_report(ns) -> str:
    """CSV lines: n, closed-form value, brute-force value, |W^3|."""
    lines = ["n,formula,brute_force,w3_count"]
    for n in ns:
        formula = lower_bound_formula(n)
        brute = brute_force_minimum(n) if n <= 10 else ""
        w3 = len(enumerate_W3(n)) if n >= 15 else ""
        lines.append("%d,%d,%s,%s" % (n, formula, brute, w3))
    return "\n".join(lines) + "\n"
