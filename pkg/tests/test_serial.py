import math
import random

import pytest

from hdastar.heuristics import Manhattan
from hdastar.metrics import MEMORY_FAILURE, SOLVED, UNSOLVABLE, WorkerStats
from hdastar.puzzle import TileState, parse_instance
from hdastar.serial import (
    DUPLICATE,
    IMPROVED,
    NEW,
    REOPENED,
    SearchSpace,
    TranspositionTable,
    astar,
    evict_count,
    idastar_tt,
    tt_insert_with_replacement,
)

from conftest import eight_puzzles


def test_goal_instance_costs_nothing(h8):
    r = astar(TileState.goal(3), h8)
    assert (r.outcome, r.cost, r.path, r.total_expanded) == (SOLVED, 0, "", 0)
    r = idastar_tt(TileState.goal(3), h8)
    assert (r.cost, r.path, r.extras["iterations"]) == (0, "", 1)


def test_astar_optimal_with_valid_path(bfs8, h8):
    for s in eight_puzzles(20, 11):
        r = astar(s, h8)
        assert r.cost == bfs8[s.packed()]
        assert len(r.path) == r.cost
        assert s.apply(r.path).is_goal()


def test_idastar_tt_matches_astar(h8):
    for s in eight_puzzles(20, 12):
        a, b = astar(s, h8), idastar_tt(s, h8, tt_capacity=500)
        assert a.cost == b.cost
        assert s.apply(b.path).is_goal()
        assert b.thresholds[-1] == a.cost
        assert all(y - x == 2 for x, y in zip(b.thresholds, b.thresholds[1:]))


def test_memory_failure_reports_f_min(h8):
    s = eight_puzzles(1, 3)[0]
    full = astar(s, h8)
    r = astar(s, h8, node_budget=30)
    assert r.outcome == MEMORY_FAILURE
    assert h8(s.packed()) <= r.f_min <= full.cost


def test_unsolvable_exhausts_open():
    s = TileState((0, 2, 1, 3, 4, 5), 3, 2)
    r = astar(s, Manhattan(3, 2))
    assert r.outcome == UNSOLVABLE
    assert r.total_expanded == 360


def test_space_integrate_outcomes():
    space = SearchSpace(lambda s: 0, WorkerStats())
    assert space.integrate(b"a", 5, None) == NEW
    assert space.integrate(b"a", 6, None) == DUPLICATE
    assert space.integrate(b"a", 4, None) == IMPROVED
    state, rec = space.pop()
    assert rec.g == 4
    assert space.integrate(b"a", 3, None) == REOPENED
    assert space.pop()[1].g == 3
    assert space.pop() is None


def test_pop_respects_bound():
    space = SearchSpace(lambda s: 0, WorkerStats())
    space.integrate(b"x", 7, None)
    assert space.pop(bound=7) is None
    assert space.pop(bound=8)[0] == b"x"


def test_tie_break_prefers_deeper():
    space = SearchSpace(lambda s: {b"deep": 0, b"shallow": 4}[s], WorkerStats())
    space.integrate(b"shallow", 1, None)
    space.integrate(b"deep", 5, None)
    assert space.pop()[0] == b"deep"


@pytest.mark.parametrize("n", [1, 3, 7, 10, 11, 99, 100, 1000])
def test_evict_count_is_ceiling_of_30_percent(n):
    assert evict_count(n) == math.ceil(n * 3 / 10)


def test_tt_prunes_only_within_epoch():
    tt = TranspositionTable(10)
    tt.store(b"s", 4, epoch=0)
    assert tt.prunes(b"s", 4, 0)
    assert tt.prunes(b"s", 6, 0)
    assert not tt.prunes(b"s", 3, 0)
    assert not tt.prunes(b"s", 9, 1)


def test_tt_replacement_on_full_insert():
    tt = TranspositionTable(10)
    for i in range(10):
        tt.store(bytes([i]), 0)
    for i in range(3, 10):
        tt.lookup(bytes([i]))
    tt_insert_with_replacement(tt, b"new", 0)
    assert tt.replacements == 1
    assert len(tt) == 10 - 3 + 1
    assert all(bytes([i]) not in tt for i in range(3))
    assert b"new" in tt


def test_tt_rejects_bad_capacity():
    with pytest.raises(ValueError):
        TranspositionTable(0)


def test_idastar_small_table_still_optimal(h8, bfs8):
    for s in eight_puzzles(10, 13):
        r = idastar_tt(s, h8, tt_capacity=20)
        assert r.cost == bfs8[s.packed()]


def test_idastar_initial_threshold_skips(h8):
    s = parse_instance("8 6 7 2 5 4 3 0 1")
    plain = idastar_tt(s, h8)
    skip = idastar_tt(s, h8, initial_threshold=plain.thresholds[2])
    assert skip.thresholds == plain.thresholds[2:]
    assert skip.cost == plain.cost


def test_popped_f_non_decreasing(h8):
    for s in eight_puzzles(5, 14):
        r = astar(s, h8, trace=True)
        fs = [f for _, _, f in r.per_worker[0].trace]
        assert fs == sorted(fs)
        assert r.total_reexpansions == 0
