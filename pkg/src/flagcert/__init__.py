"""Exact lower bound on monotone 4-subsequences via flag algebras.

Pipeline: enumerate small inversion graphs, build density tables, emit a
complement-reduced integer SDP, solve numerically, round to an exact
rational certificate, and verify it independently.
"""

from .graphs import Graph, Permutation, canonical_form, enumerate_admissible
from .flags import Flag, TypeGraph, enumerate_flags, sigma0, sigma1, sigma2
from .density import objective_f, pair_density_table
from .sdpgen import ReducedProblem, build_reduced_problem, write_sdpa

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "Permutation",
    "canonical_form",
    "enumerate_admissible",
    "Flag",
    "TypeGraph",
    "enumerate_flags",
    "sigma0",
    "sigma1",
    "sigma2",
    "objective_f",
    "pair_density_table",
    "ReducedProblem",
    "build_reduced_problem",
    "write_sdpa",
    "__version__",
]
