import pytest

from hdastar.heuristics import Manhattan, make_heuristic
from hdastar.pdb import PartitionError, PatternPartition, pdb_build, pdb_heuristic, rank_positions, table_size
from hdastar.puzzle import TileState, geometry

from conftest import bfs_distances


def test_rank_is_a_bijection():
    from itertools import permutations

    n, k = 6, 3
    ranks = {rank_positions(p, n) for p in permutations(range(n), k)}
    assert ranks == set(range(table_size(n, k)))


def test_partition_parse_and_spec():
    part = PatternPartition.parse("1,2,3,4;5,6,7,8")
    assert part.groups == ((1, 2, 3, 4), (5, 6, 7, 8))
    assert PatternPartition.parse(part.spec()) == part


@pytest.mark.parametrize("spec", ["1,2;2,3", "0,1", "1,9", "1,a"])
def test_bad_partitions(spec):
    with pytest.raises(PartitionError):
        pdb_build(PatternPartition.parse(spec), 3, 3)


def test_goal_maps_to_zero():
    db = pdb_build(PatternPartition.parse("1,2,3,4,5,6,7,8"), 3, 3)
    assert pdb_heuristic(db, TileState.goal(3)) == 0


def test_full_group_on_2x3_is_exact():
    # one group holding every tile: each move costs 1, so the PDB is the true distance
    db = pdb_build(PatternPartition.parse("1,2,3,4,5"), 3, 2)
    dist = bfs_distances(3, 2)
    for s, d in dist.items():
        assert db(s) == d


def test_tables_match_dijkstra_oracle():
    import heapq

    geo = geometry(3, 3)
    db = pdb_build(PatternPartition.parse("1,2,3,4;5,6,7,8"), 3, 3)
    for gi, group in enumerate(db.partition.groups):
        start = (0, group)
        dist = {start: 0}
        pq = [(0, start)]
        while pq:
            d, (b, pos) = heapq.heappop(pq)
            if d > dist[(b, pos)]:
                continue
            for nb, _ in geo.neighbours[b]:
                if nb in pos:
                    i = pos.index(nb)
                    nxt, c = (nb, pos[:i] + (b,) + pos[i + 1:]), 1
                else:
                    nxt, c = (nb, pos), 0
                if d + c < dist.get(nxt, 1 << 30):
                    dist[nxt] = d + c
                    heapq.heappush(pq, (d + c, nxt))
        best = {}
        for (_, pos), d in dist.items():
            best[pos] = min(best.get(pos, 1 << 30), d)
        assert len(best) == table_size(9, 4)
        for pos, d in best.items():
            assert db.lookup_group(gi, pos) == d


def test_disjoint_pdb_admissible_and_dominates_manhattan(bfs8):
    db = make_heuristic("pdb:1,2,3,4;5,6,7,8", 3, 3)
    md = Manhattan(3, 3)
    for s, d in bfs8.items():
        assert md(s) <= db(s) <= d


def test_astar_with_pdb_is_optimal(bfs8):
    # the blank-free abstraction is admissible but not always consistent; A* reopens
    from hdastar.serial import astar
    from conftest import eight_puzzles

    db = make_heuristic("pdb:1,2,3,4;5,6,7,8", 3, 3)
    for s in eight_puzzles(15, 9):
        assert astar(s, db).cost == bfs8[s.packed()]


def test_cache_roundtrip(tmp_path):
    part = PatternPartition.parse("1,2,3;4,5")
    a = pdb_build(part, 3, 2, cache_dir=tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    b = pdb_build(part, 3, 2, cache_dir=tmp_path)
    for s in bfs_distances(3, 2):
        assert a(s) == b(s)


def test_unknown_heuristic():
    with pytest.raises(ValueError):
        make_heuristic("euclid", 3)
