"""Assemble the integer SDP with complement reduction; SDPA sparse I/O.

The unreduced program carries one PSD matrix per type (20x20, 71x71,
71x71) and one constraint per 7-vertex class.  Complement symmetry cuts
both in half: Q2 is Q1 conjugated by the complement bijection, Q0 is
constant on complement pairs of flags so only its 10x10 class matrix B
survives, and the constraints for H and its complement merge.  What
remains: variables B (10x10) and Q1 (71x71), one constraint per class
pair, 388 in all.

Scaling makes every file coefficient an integer: the objective scale is
M = 27*35 = 945 (so M*f(H) = 27*(K4 count + K4bar count) is integral)
and each reduced table is multiplied by the lcm N_k of its entry
denominators.

The emitted file encodes, in SDPA sparse format: maximize y subject to
<A_t, X> = M*f(H_t) over X = diag(B, Q1, y, s) >= 0 with
A_t = diag(N0*Bt_t, N1*Dt_t, 1, e_t e_t^T).  The solver's optimal y is
the scaled bound, expected 35 = 945/27.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .density import objective_f, pair_density_table
from .flags import (FlagBasis, complement_index_map, enumerate_flags, sigma0,
                    sigma1, sigma2)
from .graphs import canonical_form, complement, enumerate_admissible

__all__ = [
    "ScalingConfig",
    "ReducedProblem",
    "SdpaFile",
    "reduce_classes",
    "sigma0_pair_classes",
    "reduce_sigma0_block",
    "fold_sigma2_into_sigma1",
    "compute_scaling",
    "build_reduced_problem",
    "write_sdpa",
    "sdpa_text",
    "read_sdpa",
    "serialize_sdpa",
]

OBJECTIVE_SCALE = 27 * 35


@dataclass(frozen=True)
class ScalingConfig:
    M: int
    N: tuple[int, ...]


@dataclass(frozen=True)
class ReducedProblem:
    """Integer data of the reduced SDP plus the index maps that built it.

    a0[t] and a1[t] are sparse upper-triangle {(i,j): int} blocks of the
    t-th constraint, already carrying the N_k scale; b[t] = M*f(H_t).
    """

    reps: tuple[int, ...]
    partners: tuple[int, ...]
    b: tuple[int, ...]
    a0: tuple[dict, ...]
    a1: tuple[dict, ...]
    scaling: ScalingConfig
    pair_classes: tuple[tuple[int, int], ...]
    sigma2_to_sigma1: tuple[int, ...]

    @property
    def block_dims(self) -> tuple[int, ...]:
        npairs = len(self.pair_classes)
        nflags = len(self.sigma2_to_sigma1)
        return (npairs, nflags, 1, -len(self.reps))

    @property
    def num_vars(self) -> int:
        npairs, nflags = len(self.pair_classes), len(self.sigma2_to_sigma1)
        return npairs * (npairs + 1) // 2 + nflags * (nflags + 1) // 2


def _sym_get(d: dict, i: int, j: int) -> Fraction:
    return d.get((i, j) if i <= j else (j, i), Fraction(0))


def reduce_classes(classes: list) -> list[tuple[int, int]]:
    """Pair each class with its complement; representative = smaller index."""
    index_of = {canonical_form(g).code: i for i, g in enumerate(classes)}
    pairs = []
    for i, g in enumerate(classes):
        j = index_of[canonical_form(complement(g)).code]
        if i == j:
            raise AssertionError(
                "self-complementary class %d breaks the pair reduction" % i)
        if i < j:
            pairs.append((i, j))
    return pairs


def sigma0_pair_classes(basis: FlagBasis) -> list[tuple[int, int]]:
    """The flag complement pairing as 10 (i, ibar) classes, i < ibar."""
    m = complement_index_map(basis, basis)
    if any(m[i] == i for i in range(len(m))):
        raise AssertionError(
            "complement pairing has a fixed point; the reduced variable "
            "count C(11,2) would be wrong")
    return [(i, m[i]) for i in range(len(m)) if i < m[i]]


def reduce_sigma0_block(d20: dict, pairs: list) -> dict:
    """Class matrix: Bt[a][b] = sum of the four pair-expanded entries."""
    out = {}
    for a, (ia, ibar_a) in enumerate(pairs):
        for b in range(a, len(pairs)):
            ib, ibar_b = pairs[b]
            v = (_sym_get(d20, ia, ib) + _sym_get(d20, ibar_a, ib)
                 + _sym_get(d20, ia, ibar_b) + _sym_get(d20, ibar_a, ibar_b))
            if v:
                out[(a, b)] = v
    return out


def fold_sigma2_into_sigma1(d1: dict, d2: dict, to_sigma2: tuple) -> dict:
    """Dt[i][j] = D1[i][j] + D2[ibar][jbar] under the complement bijection."""
    out = {}
    n = len(to_sigma2)
    for i in range(n):
        for j in range(i, n):
            bi, bj = to_sigma2[i], to_sigma2[j]
            v = _sym_get(d1, i, j) + _sym_get(d2, bi, bj)
            if v:
                out[(i, j)] = v
    return out


def compute_scaling(reduced0: list, reduced1: list) -> ScalingConfig:
    """M = 945; N_k = lcm of entry denominators of the reduced tables."""
    n0 = 1
    for d in reduced0:
        for v in d.values():
            n0 = lcm(n0, v.denominator)
    n1 = 1
    for d in reduced1:
        for v in d.values():
            n1 = lcm(n1, v.denominator)
    return ScalingConfig(OBJECTIVE_SCALE, (n0, n1))


def _scale_block(d: dict, n: int) -> dict:
    out = {}
    for ij, v in d.items():
        w = v * n
        if w.denominator != 1:
            raise AssertionError("scaling failed to clear denominator at %r" % (ij,))
        if w:
            out[ij] = int(w)
    return out


def build_reduced_problem(classes=None, tables=None) -> ReducedProblem:
    """Full assembly from scratch (or from prebuilt tables, for tests)."""
    if classes is None:
        classes = enumerate_admissible(7)
    b0 = enumerate_flags(sigma0(), 4)
    b1 = enumerate_flags(sigma1(), 5)
    b2 = enumerate_flags(sigma2(), 5)
    if tables is None:
        t0 = pair_density_table(sigma0(), b0, classes, 0)
        t1 = pair_density_table(sigma1(), b1, classes, 1)
        t2 = pair_density_table(sigma2(), b2, classes, 2)
    else:
        t0, t1, t2 = tables
    pairs = sigma0_pair_classes(b0)
    to_sigma2 = complement_index_map(b1, b2)
    rep_pairs = reduce_classes(classes)
    reduced0 = [reduce_sigma0_block(t0.entries[r], pairs) for r, _ in rep_pairs]
    reduced1 = [fold_sigma2_into_sigma1(t1.entries[r], t2.entries[r], to_sigma2)
                for r, _ in rep_pairs]
    scaling = compute_scaling(reduced0, reduced1)
    n0, n1 = scaling.N
    a0 = tuple(_scale_block(d, n0) for d in reduced0)
    a1 = tuple(_scale_block(d, n1) for d in reduced1)
    b = []
    for r, _ in rep_pairs:
        v = scaling.M * objective_f(classes[r])
        assert v.denominator == 1
        b.append(int(v))
    return ReducedProblem(
        reps=tuple(r for r, _ in rep_pairs),
        partners=tuple(p for _, p in rep_pairs),
        b=tuple(b),
        a0=a0,
        a1=a1,
        scaling=scaling,
        pair_classes=tuple(pairs),
        sigma2_to_sigma1=to_sigma2,
    )


def sdpa_text(problem: ReducedProblem) -> str:
    """Deterministic SDPA sparse serialization of the reduced problem."""
    m = len(problem.reps)
    dims = problem.block_dims
    lines = [str(m), str(len(dims)), " ".join(str(d) for d in dims),
             " ".join(str(v) for v in problem.b)]
    # objective: maximize the bound block entry
    lines.append("0 3 1 1 1")
    for t in range(m):
        for (i, j) in sorted(problem.a0[t]):
            lines.append("%d 1 %d %d %d" % (t + 1, i + 1, j + 1,
                                            problem.a0[t][(i, j)]))
        for (i, j) in sorted(problem.a1[t]):
            lines.append("%d 2 %d %d %d" % (t + 1, i + 1, j + 1,
                                            problem.a1[t][(i, j)]))
        lines.append("%d 3 1 1 1" % (t + 1,))
        lines.append("%d 4 %d %d 1" % (t + 1, t + 1, t + 1))
    return "\n".join(lines) + "\n"


def write_sdpa(problem: ReducedProblem, path) -> None:
    with open(path, "w") as fh:
        fh.write(sdpa_text(problem))


@dataclass(frozen=True)
class SdpaFile:
    m: int
    dims: tuple[int, ...]
    rhs: tuple[int, ...]
    entries: tuple[tuple[int, int, int, int, int], ...]


def read_sdpa(path) -> SdpaFile:
    """Parse an integer SDPA sparse file (comments tolerated)."""
    entries = []
    header: list[int] = []
    rhs: list[int] = []
    state = "m"
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line[0] in "\"*":
                continue
            parts = line.replace(",", " ").split()
            if state == "m":
                header.append(int(parts[0]))
                state = "nblocks"
            elif state == "nblocks":
                header.append(int(parts[0]))
                state = "dims"
            elif state == "dims":
                dims = tuple(int(p) for p in parts)
                if len(dims) != header[1]:
                    raise ValueError("block-size line does not match nblocks")
                header.extend(dims)
                state = "rhs"
            elif state == "rhs":
                rhs.extend(int(p) for p in parts)
                if len(rhs) > header[0]:
                    raise ValueError("too many right-hand-side values")
                if len(rhs) == header[0]:
                    state = "entries"
            else:
                if len(parts) != 5:
                    raise ValueError("bad entry line: %r" % raw)
                entries.append(tuple(int(p) for p in parts))
    if state != "entries":
        raise ValueError("truncated SDPA file")
    return SdpaFile(header[0], tuple(header[2:]), tuple(rhs), tuple(entries))


def serialize_sdpa(f: SdpaFile) -> str:
    lines = [str(f.m), str(len(f.dims)), " ".join(str(d) for d in f.dims),
             " ".join(str(v) for v in f.rhs)]
    for e in f.entries:
        lines.append("%d %d %d %d %d" % e)
    return "\n".join(lines) + "\n"
