"""Serial A* and IDA* with a transposition table.

These are the baselines and correctness oracles for the parallel searches.
:class:`SearchSpace` (open list + closed map) is also the per-worker store of
the hash-distributed searches, so with one worker they behave identically.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from itertools import count
from typing import Callable

from .metrics import MEMORY_FAILURE, SOLVED, UNSOLVABLE, RunReport, WorkerStats
from .puzzle import TileState, geometry, path_moves

Heuristic = Callable[[bytes], int]

NEW, DUPLICATE, REOPENED, IMPROVED = "new", "duplicate", "reopened", "improved"


@dataclass
class SearchNode:
    state: TileState
    g: int
    h: int
    parent: bytes | None = None

    @property
    def f(self) -> int:
        return self.g + self.h


class Record:
    """Closed-map entry; ``h`` is computed once and reused on reopening."""

    __slots__ = ("g", "h", "parent", "closed", "expansions")

    def __init__(self, g: int, h: int, parent: bytes | None):
        self.g = g
        self.h = h
        self.parent = parent
        self.closed = False
        self.expansions = 0


class OpenList:
    """Binary heap ordered by (f asc, g desc, insertion order)."""

    def __init__(self):
        self.heap: list = []
        self._tick = count()

    def push(self, state: bytes, g: int, h: int) -> None:
        heapq.heappush(self.heap, (g + h, -g, next(self._tick), state))

    def __len__(self) -> int:
        return len(self.heap)


class ClosedMap(dict):
    """Full state -> :class:`Record` (covers open and closed states)."""


class SearchSpace:
    def __init__(self, heuristic: Heuristic, stats: WorkerStats):
        self.heuristic = heuristic
        self.stats = stats
        self.open = OpenList()
        self.closed = ClosedMap()

    def __len__(self) -> int:
        return len(self.closed)

    def integrate(self, state: bytes, g: int, parent: bytes | None) -> str:
        rec = self.closed.get(state)
        if rec is None:
            self.stats.heuristic_calls += 1
            h = self.heuristic(state)
            self.closed[state] = Record(g, h, parent)
            self.open.push(state, g, h)
            return NEW
        if rec.g <= g:
            self.stats.duplicates_received += 1
            return DUPLICATE
        rec.g = g
        rec.parent = parent
        self.open.push(state, g, rec.h)
        if rec.closed:
            rec.closed = False
            return REOPENED
        return IMPROVED

    def _clean_top(self) -> None:
        heap = self.open.heap
        closed = self.closed
        while heap:
            _, ng, _, state = heap[0]
            rec = closed[state]
            if rec.closed or rec.g != -ng:
                heapq.heappop(heap)
            else:
                return

    def min_f(self) -> int | None:
        self._clean_top()
        return self.open.heap[0][0] if self.open.heap else None

    def pop(self, bound: int | None = None) -> tuple[bytes, Record] | None:
        """Pop the best live entry, unless its f is >= ``bound``."""
        self._clean_top()
        heap = self.open.heap
        if not heap or (bound is not None and heap[0][0] >= bound):
            return None
        _, _, _, state = heapq.heappop(heap)
        rec = self.closed[state]
        rec.closed = True
        return state, rec

    def live_entries(self):
        """Yield ``(state, g, h)`` for every live open entry."""
        for f, ng, _, state in self.open.heap:
            rec = self.closed[state]
            if not rec.closed and rec.g == -ng:
                yield state, rec.g, rec.h


def reconstruct(goal: bytes, lookup: Callable[[bytes], Record | None]) -> list[bytes]:
    """Follow parent links back to the root.

    Each hop strictly decreases g, so the walk terminates even if records
    were improved after their children were generated.
    """
    path = [goal]
    rec = lookup(goal)
    while rec is not None and rec.parent is not None:
        path.append(rec.parent)
        rec = lookup(rec.parent)
    path.reverse()
    return path


def _as_packed(start) -> tuple[bytes, int, int]:
    if isinstance(start, TileState):
        return start.packed(), start.width, start.height
    raise TypeError("start must be a TileState")


def astar(
    start: TileState,
    heuristic: Heuristic,
    node_budget: int | None = None,
    trace: bool = False,
    instance: str = "",
) -> RunReport:
    """Serial A*; ``node_budget`` caps stored unique states (open + closed)."""
    packed, w, h = _as_packed(start)
    geo = geometry(w, h)
    goal = geo.goal
    stats = WorkerStats()
    space = SearchSpace(heuristic, stats)
    report = RunReport(algorithm="astar", p=1, instance=instance, per_worker=[stats],
                       config={"node_budget": node_budget})
    t0 = time.perf_counter()
    space.integrate(packed, 0, None)
    while True:
        item = space.pop()
        if item is None:
            report.outcome = UNSOLVABLE
            break
        state, rec = item
        if state == goal:
            report.outcome = SOLVED
            report.cost = rec.g
            report.path = path_moves(reconstruct(goal, space.closed.get), w, h)
            break
        if rec.expansions:
            stats.reexpansions += 1
        rec.expansions += 1
        stats.record_expansion(state, rec.g, rec.g + rec.h, trace)
        g1 = rec.g + 1
        for child, *_ in geo.successors(state):
            stats.generated += 1
            space.integrate(child, g1, state)
        if node_budget is not None and len(space) > node_budget:
            report.outcome = MEMORY_FAILURE
            report.f_min = space.min_f()
            report.diagnostic = f"stored states {len(space)} exceeded budget {node_budget}"
            break
    stats.wall_time = report.wall_time = time.perf_counter() - t0
    return report


# --- IDA* with transposition table --------------------------------------

class TTEntry:
    __slots__ = ("g", "epoch", "last_access", "frequency")

    def __init__(self, g: int, epoch: int, last_access: int):
        self.g = g
        self.epoch = epoch
        self.last_access = last_access
        self.frequency = 1


def evict_count(n: int) -> int:
    """ceil(0.30 * n) in exact integer arithmetic."""
    return (3 * n + 9) // 10


class TranspositionTable:
    """Bounded table with batch replacement of the least-frequently used 30%.

    Replacement fires when inserting into a full table.  Ties on frequency go
    to the entry accessed longest ago.
    """

    def __init__(self, capacity: int | None = None):
        if capacity is not None and capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.entries: dict[bytes, TTEntry] = {}
        self.access_clock = 0
        self.replacements = 0
        self.evicted = 0

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, state) -> bool:
        return state in self.entries

    def _tick(self) -> int:
        self.access_clock += 1
        return self.access_clock

    def lookup(self, state: bytes) -> TTEntry | None:
        e = self.entries.get(state)
        if e is not None:
            e.frequency += 1
            e.last_access = self._tick()
        return e

    def prunes(self, state: bytes, g: int, epoch: int) -> bool:
        e = self.lookup(state)
        return e is not None and e.epoch == epoch and e.g <= g

    def replace(self) -> list[bytes]:
        victims = sorted(self.entries.items(), key=lambda kv: (kv[1].frequency, kv[1].last_access))
        victims = [s for s, _ in victims[: evict_count(len(self.entries))]]
        for s in victims:
            del self.entries[s]
        self.replacements += 1
        self.evicted += len(victims)
        return victims

    def store(self, state: bytes, g: int, epoch: int = 0) -> None:
        e = self.entries.get(state)
        if e is not None:
            e.g = g
            e.epoch = epoch
            e.frequency += 1
            e.last_access = self._tick()
            return
        if self.capacity is not None and len(self.entries) >= self.capacity:
            self.replace()
        self.entries[state] = TTEntry(g, epoch, self._tick())


def tt_insert_with_replacement(tt: TranspositionTable, state: bytes, g: int, epoch: int = 0) -> None:
    tt.store(state, g, epoch)


def idastar_tt(
    start: TileState,
    heuristic: Heuristic,
    tt_capacity: int | None = None,
    trace: bool = False,
    initial_threshold: int | None = None,
    instance: str = "",
) -> RunReport:
    """IDA* whose transposition table prunes only within one iteration."""
    packed, w, h = _as_packed(start)
    geo = geometry(w, h)
    goal = geo.goal
    stats = WorkerStats()
    tt = TranspositionTable(tt_capacity)
    report = RunReport(algorithm="idastar-tt", p=1, instance=instance, per_worker=[stats],
                       config={"tt_capacity": tt_capacity})
    inserted: list[list[bytes]] = []
    t0 = time.perf_counter()
    stats.heuristic_calls += 1
    h0 = heuristic(packed)
    threshold = h0 if initial_threshold is None else max(h0, initial_threshold)
    epoch = 0
    while True:
        report.thresholds.append(threshold)
        if trace:
            inserted.append([])
        min_pruned = None
        found = None
        stack = [(packed, 0, h0, "")]
        while stack:
            state, g, hv, moves = stack.pop()
            f = g + hv
            if f > threshold:
                if min_pruned is None or f < min_pruned:
                    min_pruned = f
                continue
            if tt.prunes(state, g, epoch):
                stats.duplicates_received += 1
                continue
            tt.store(state, g, epoch)
            if trace:
                inserted[-1].append(state)
            if state == goal:
                found = (g, moves)
                break
            stats.record_expansion(state, g, f, trace)
            g1 = g + 1
            for child, _, _, _, letter in geo.successors(state):
                stats.generated += 1
                stats.heuristic_calls += 1
                stack.append((child, g1, heuristic(child), moves + letter))
        if found is not None:
            report.outcome = SOLVED
            report.cost, report.path = found
            break
        if min_pruned is None:
            report.outcome = UNSOLVABLE
            break
        threshold = min_pruned
        epoch += 1
    stats.wall_time = report.wall_time = time.perf_counter() - t0
    report.extras["iterations"] = len(report.thresholds)
    report.extras["tt_replacements"] = tt.replacements
    if trace:
        report.extras["inserted"] = inserted
    return report
