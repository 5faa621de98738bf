import pytest

from hdastar.metrics import MEMORY_FAILURE, SOLVED
from hdastar.puzzle import TileState, geometry
from hdastar.runtime import SearchConfig
from hdastar.serial import idastar_tt
from hdastar.tds import PRUNED_DUPLICATE, PRUNED_THRESHOLD, PUSHED, TdsWorker, next_threshold, tds, tds_route_and_check
from hdastar.transport import AsyncTransport
from hdastar.zobrist import ZobristTable, owner

from conftest import eight_puzzles

SIM = SearchConfig(runner="sim")


@pytest.mark.parametrize("p", [1, 2, 4])
def test_thresholds_match_serial(h8, bfs8, p):
    for s in eight_puzzles(6, 31 + p):
        r = tds(s, h8, p, SIM)
        assert r.outcome == SOLVED and r.cost == bfs8[s.packed()]
        assert r.thresholds == idastar_tt(s, h8).thresholds
        assert s.apply(r.path).is_goal()


def test_goal_start_one_iteration(h8):
    r = tds(TileState.goal(3), h8, 3, SIM)
    assert (r.cost, r.extras["iterations"]) == (0, 1)


def test_initial_threshold_skips_iterations(h8):
    s = eight_puzzles(1, 35)[0]
    plain = tds(s, h8, 2, SIM)
    skip = tds(s, h8, 2, SIM, initial_threshold=plain.thresholds[1])
    assert skip.thresholds == plain.thresholds[1:]
    assert skip.cost == plain.cost


def test_small_table_with_replacement_still_optimal(h8, bfs8):
    for s in eight_puzzles(4, 36):
        r = tds(s, h8, 3, SearchConfig(runner="sim", tt_capacity=60))
        assert r.cost == bfs8[s.packed()]
        assert r.extras["tt_replacements"] > 0


def test_ownership_and_audit_under_delays(h8):
    zt = ZobristTable(3)
    for i, s in enumerate(eight_puzzles(4, 37)):
        r = tds(s, h8, 3, SearchConfig(transport=f"delay:{i}", audit=True, trace=True, pack_size=5))
        assert r.solved and r.audit_violations == []
        for wid, stats in enumerate(r.per_worker):
            assert all(owner(zt.hash(st), 3) == wid for st, _, _ in stats.trace)


def test_stack_cap_is_memory_failure(h8):
    s = eight_puzzles(1, 38)[0]
    r = tds(s, h8, 2, SearchConfig(runner="sim", stack_cap=3))
    assert r.outcome == MEMORY_FAILURE


def test_next_threshold():
    assert next_threshold([None, 24, 22, None]) == 22
    assert next_threshold([None, None]) is None
    with pytest.raises(ValueError):
        next_threshold([20], current=20)


def make_worker(threshold):
    zt = ZobristTable(3)
    start = TileState.goal(3).packed()
    w = TdsWorker(
        0, 1, AsyncTransport(1), SearchConfig(trace=True), geo=geometry(3, 3),
        heuristic=lambda s: 2, zobrist=zt, start=start, threshold=threshold,
    )
    w.stack.clear()
    return w


def test_route_checks_threshold_before_table():
    w = make_worker(threshold=5)
    s = bytes([1, 0, 2, 3, 4, 5, 6, 7, 8])
    assert tds_route_and_check(w, s, 3) == PUSHED
    assert tds_route_and_check(w, s, 3) == PRUNED_DUPLICATE
    assert tds_route_and_check(w, s, 4) == PRUNED_THRESHOLD
    assert w.min_pruned == 6
    assert tds_route_and_check(w, s, 1) == PUSHED
    assert len(w.stack) == 2


def test_unique_states_match_serial_per_iteration(h8):
    for i, s in enumerate(eight_puzzles(5, 39)):
        serial = idastar_tt(s, h8, trace=True).extras["inserted"]
        r = tds(s, h8, 3, SearchConfig(transport=f"delay:{i}", trace=True))
        par = r.extras["inserted"]
        assert len(par) == len(serial)
        # complete iterations agree exactly; the last one is cut short by the goal in both
        for a, b in zip(par[:-1], serial[:-1]):
            assert set(a) == set(b)


def test_next_threshold_example():
    assert next_threshold([14, 12, 16]) == 12
