"""Heuristic objects usable by every search routine.

A heuristic is any callable mapping a packed state (``bytes``) to a
non-negative int; ``name`` is echoed into reports.
"""

from __future__ import annotations

from .pdb import PatternPartition, pdb_build
from .puzzle import geometry


class Manhattan:
    def __init__(self, width: int, height: int | None = None):
        height = width if height is None else height
        self.width = width
        self.height = height
        self.name = "manhattan"
        self._table = geometry(width, height).manhattan_table

    def __call__(self, packed: bytes) -> int:
        table = self._table
        return sum(table[t][i] for i, t in enumerate(packed) if t)


def make_heuristic(spec: str, width: int, height: int | None = None, cache_dir=None):
    """``"manhattan"`` or ``"pdb:1,2,3,4;5,6,7,8"``."""
    height = width if height is None else height
    if spec == "manhattan":
        return Manhattan(width, height)
    if spec.startswith("pdb:"):
        return pdb_build(PatternPartition.parse(spec[4:]), width, height, cache_dir=cache_dir)
    raise ValueError(f"unknown heuristic {spec!r}")
