"""Additive (disjoint) pattern databases for sliding-tile puzzles.

Each group's table is filled by a 0-1 breadth-first search backwards from the
goal over ``(blank, group tile positions)``: sliding a group tile costs 1,
sliding any other tile costs 0.  The stored value for a position tuple is the
minimum over blank positions, so the lookup ignores where the blank is and
the per-group values can be summed admissibly.
"""

from __future__ import annotations

import hashlib
import os
from collections import deque
from dataclasses import dataclass
from math import perm
from pathlib import Path
from typing import Sequence

import numpy as np

from .puzzle import TileState, geometry

FORMAT_VERSION = 1
UNREACHED = 255


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class PatternPartition:
    groups: tuple[tuple[int, ...], ...]

    @classmethod
    def parse(cls, spec: str) -> "PatternPartition":
        """``"1,2,3,4;5,6,7,8"`` -> two groups."""
        groups = []
        for chunk in spec.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            try:
                groups.append(tuple(int(t) for t in chunk.split(",") if t.strip()))
            except ValueError:
                raise PartitionError(f"bad partition group {chunk!r}") from None
        return cls(tuple(groups))

    def spec(self) -> str:
        return ";".join(",".join(str(t) for t in g) for g in self.groups)

    def validate(self, width: int, height: int) -> None:
        n = width * height
        seen: set[int] = set()
        for g in self.groups:
            if not g:
                raise PartitionError("empty group")
            for t in g:
                if not 1 <= t < n:
                    raise PartitionError(f"tile {t} out of range 1..{n - 1}")
                if t in seen:
                    raise PartitionError(f"tile {t} appears in more than one group")
                seen.add(t)
        if seen != set(range(1, n)):
            raise PartitionError(f"groups do not cover tiles {sorted(set(range(1, n)) - seen)}")


def rank_positions(positions: Sequence[int], n: int) -> int:
    """Mixed-radix rank of a tuple of distinct cells (k-permutation of n)."""
    r = 0
    for i, p in enumerate(positions):
        digit = p - sum(1 for q in positions[:i] if q < p)
        r = r * (n - i) + digit
    return r


def table_size(n: int, k: int) -> int:
    return perm(n, k)


class PatternDatabase:
    """Sum of per-group exact abstract distances; callable on packed states."""

    def __init__(self, partition: PatternPartition, width: int, height: int, tables: list[np.ndarray]):
        self.partition = partition
        self.width = width
        self.height = height
        self.tables = tables
        self.name = f"pdb:{partition.spec()}"
        n = width * height
        # tile -> (group index, slot within group)
        self._slot = {}
        for gi, g in enumerate(partition.groups):
            for si, t in enumerate(g):
                self._slot[t] = (gi, si)
        self._n = n
        self._bytes = [t.tobytes() for t in tables]

    def lookup_group(self, gi: int, positions: Sequence[int]) -> int:
        return self._bytes[gi][rank_positions(positions, self._n)]

    def __call__(self, packed: bytes) -> int:
        groups = self.partition.groups
        pos = [[0] * len(g) for g in groups]
        slot = self._slot
        for cell, tile in enumerate(packed):
            if tile:
                gi, si = slot[tile]
                pos[gi][si] = cell
        n = self._n
        total = 0
        for gi, p in enumerate(pos):
            total += self._bytes[gi][rank_positions(p, n)]
        return total


def _build_group(group: tuple[int, ...], width: int, height: int) -> np.ndarray:
    geo = geometry(width, height)
    n = width * height
    table = np.full(table_size(n, len(group)), UNREACHED, dtype=np.uint8)
    start = (0, tuple(group))  # goal: tile t sits on cell t, blank on 0
    dist = {start: 0}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        d = dist[state]
        blank, positions = state
        r = rank_positions(positions, n)
        if table[r] > d:
            table[r] = d
        for nb, _ in geo.neighbours[blank]:
            if nb in positions:
                idx = positions.index(nb)
                nxt = (nb, positions[:idx] + (blank,) + positions[idx + 1:])
                cost = 1
            else:
                nxt = (nb, positions)
                cost = 0
            nd = d + cost
            if nd < dist.get(nxt, 1 << 30):
                dist[nxt] = nd
                if cost:
                    queue.append(nxt)
                else:
                    queue.appendleft(nxt)
    return table


def _cache_path(cache_dir: Path, partition: PatternPartition, width: int, height: int) -> Path:
    digest = hashlib.sha1(partition.spec().encode()).hexdigest()[:16]
    return cache_dir / f"pdb-v{FORMAT_VERSION}-{width}x{height}-{digest}.npz"


def pdb_build(
    partition: PatternPartition, width: int, height: int | None = None, cache_dir: str | os.PathLike | None = None
) -> PatternDatabase:
    """Build (or load from ``cache_dir``) the disjoint PDB for ``partition``."""
    height = width if height is None else height
    partition.validate(width, height)
    path = None
    if cache_dir is not None:
        path = _cache_path(Path(cache_dir), partition, width, height)
        if path.exists():
            with np.load(path) as data:
                if int(data["version"]) == FORMAT_VERSION and str(data["partition"]) == partition.spec():
                    tables = [data[f"g{i}"] for i in range(len(partition.groups))]
                    return PatternDatabase(partition, width, height, tables)
    tables = [_build_group(g, width, height) for g in partition.groups]
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez(
            path,
            version=FORMAT_VERSION,
            partition=partition.spec(),
            **{f"g{i}": t for i, t in enumerate(tables)},
        )
    return PatternDatabase(partition, width, height, tables)


def pdb_heuristic(db: PatternDatabase, s: TileState) -> int:
    return db(s.packed())
