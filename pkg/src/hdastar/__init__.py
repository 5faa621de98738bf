"""Hash-Distributed A* and friends for sliding-tile puzzles."""

from .hda import hda_star, hda_star_random, pra_star_sync
from .heuristics import Manhattan, make_heuristic
from .hybrid import hybrid
from .metrics import (
    ABORTED,
    MEMORY_FAILURE,
    SOLVED,
    UNSOLVABLE,
    RunReport,
    SuiteReport,
    WorkerStats,
    build_suite_report,
    expansion_rate,
    load_balance,
    r_metrics,
    relative_speedup_efficiency,
    search_overhead,
)
from .pdb import PatternDatabase, PatternPartition, pdb_build
from .puzzle import InstanceError, TileState, parse_instance, random_instance, random_walk_instance, read_instances
from .runtime import SearchConfig
from .serial import astar, idastar_tt
from .tds import tds
from .zobrist import ZobristTable, owner

__all__ = [
    "ABORTED",
    "InstanceError",
    "MEMORY_FAILURE",
    "Manhattan",
    "PatternDatabase",
    "PatternPartition",
    "RunReport",
    "SOLVED",
    "SearchConfig",
    "SuiteReport",
    "TileState",
    "UNSOLVABLE",
    "WorkerStats",
    "ZobristTable",
    "astar",
    "build_suite_report",
    "expansion_rate",
    "hda_star",
    "hda_star_random",
    "hybrid",
    "idastar_tt",
    "load_balance",
    "make_heuristic",
    "owner",
    "parse_instance",
    "pdb_build",
    "pra_star_sync",
    "r_metrics",
    "random_instance",
    "random_walk_instance",
    "read_instances",
    "relative_speedup_efficiency",
    "search_overhead",
    "tds",
]
