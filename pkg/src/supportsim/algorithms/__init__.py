"""Distributed and sequential algorithms run on top of the engine."""
from .coloring import IdColorReduction, cv_iterations, id_color_reduction
from .lcl import LclCollapseParams, collapse_params, find_n0, lcl_collapse_solve
from .mis import brute_force_mis, cluster_optimal_mis, independence_number, random_priority_mis
from .orientation import global_sinkless_orientation
from .passive import passive_local_simulation, virtual_support
from .slocal import (
    SlocalAlgorithm,
    simulate_slocal_passive,
    simulate_slocal_supported,
    slocal_greedy_coloring,
    slocal_greedy_mis,
    slocal_run_sequential,
)

__all__ = [
    "IdColorReduction",
    "cv_iterations",
    "id_color_reduction",
    "LclCollapseParams",
    "collapse_params",
    "find_n0",
    "lcl_collapse_solve",
    "brute_force_mis",
    "cluster_optimal_mis",
    "independence_number",
    "random_priority_mis",
    "global_sinkless_orientation",
    "passive_local_simulation",
    "virtual_support",
    "SlocalAlgorithm",
    "simulate_slocal_passive",
    "simulate_slocal_supported",
    "slocal_greedy_coloring",
    "slocal_greedy_mis",
    "slocal_run_sequential",
]
