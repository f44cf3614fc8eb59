"""Exact arithmetic for spin-refined tautological classes on moduli of
stable curves.

The public surface re-exports the main entry points of each module:
stable graph combinatorics, the decorated-graph ring, exact psi
integrals and pairings, lambda classes, the signed graph-sum class and
its constant term, and signed stratum classes with their Segre series.
"""

from .graphs import (GraphError, StableGraph, aut_order, canonicalize,
                     enumerate_stable_graphs, enumerate_star_trees)
from .tautology import (SeriesClass, TautClass, ambient_dim, push_forget,
                        push_glue, pull_forget, tensor)
from .integrate import (classes_equal, evaluate, pairing_rank,
                        pairing_signature, psi_integral, set_cache,
                        vertex_integral)
from .hodge import L_series, hodge_series, lambda_class, mumford_defect
from .spin import (PolynomialityError, dr_spin, pixton_spin, pixton_spin_r,
                   r_window_start)
from .strata import (StrataError, d_constant, psq_reduce, psq_series,
                     segre_roundtrip_check, segre_spin, segre_spin_mero,
                     stargraph_spin, strata_class_spin)

__version__ = "0.1.0"

__all__ = [
    "GraphError", "StableGraph", "aut_order", "canonicalize",
    "enumerate_stable_graphs", "enumerate_star_trees",
    "SeriesClass", "TautClass", "ambient_dim", "push_forget",
    "push_glue", "pull_forget", "tensor",
    "classes_equal", "evaluate", "pairing_rank", "pairing_signature",
    "psi_integral", "set_cache", "vertex_integral",
    "L_series", "hodge_series", "lambda_class", "mumford_defect",
    "PolynomialityError", "dr_spin", "pixton_spin", "pixton_spin_r",
    "r_window_start",
    "StrataError", "d_constant", "psq_reduce", "psq_series",
    "segre_roundtrip_check", "segre_spin", "segre_spin_mero",
    "stargraph_spin", "strata_class_spin",
]
