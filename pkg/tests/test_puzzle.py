import random

import pytest

from hdastar.puzzle import (
    InstanceError,
    TileState,
    geometry,
    is_solvable,
    manhattan,
    parse_instance,
    path_moves,
    random_instance,
    random_walk_instance,
    read_instances,
    successors,
    write_instance,
)


def test_goal_corner_blank_has_two_successors():
    assert len(successors(TileState.goal(3))) == 2


def test_centre_blank_has_four_successors():
    s = parse_instance("1 2 3 4 0 5 6 7 8")
    kids = successors(s)
    assert len(kids) == 4
    assert all(cost == 1 for _, cost in kids)


def test_parse_goal_and_one_move():
    assert parse_instance("0 1 2 3 4 5 6 7 8").is_goal()
    s = parse_instance("1 0 2 3 4 5 6 7 8")
    assert manhattan(s) == 1
    assert any(k.is_goal() for k, _ in successors(s))


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("0 1 2 3 4 5 6 7", "count"),
        ("0 1 2 3 4 5 6 7 7", "permutation"),
        ("0 2 1 3 4 5 6 7 8", "unsolvable"),
        ("0 1 2 x 4 5 6 7 8", "non-integer"),
    ],
)
def test_parse_errors_name_the_problem(text, fragment):
    with pytest.raises(InstanceError, match=fragment):
        parse_instance(text)


def test_unsolvable_allowed_on_request():
    s = parse_instance("0 2 1 3 4 5 6 7 8", allow_unsolvable=True)
    assert not s.solvable()


def test_board_sizes_inferred():
    for w in (3, 4, 5, 6):
        s = parse_instance(" ".join(map(str, range(w * w))))
        assert (s.width, s.height) == (w, w)


def test_manhattan_goal_zero():
    assert manhattan(TileState.goal(4)) == 0


def test_manhattan_consistent_along_edges():
    rng = random.Random(4)
    geo = geometry(4, 4)
    for _ in range(200):
        s = random_instance(4, 4, rng).packed()
        hs = geo.manhattan(s)
        for child, *_ in geo.successors(s):
            assert abs(geo.manhattan(child) - hs) == 1


def test_parity_matches_reachability_on_2x3():
    # every state reached from the goal is solvable, every other one is not
    geo = geometry(3, 2)
    seen = {geo.goal}
    frontier = [geo.goal]
    while frontier:
        nxt = []
        for s in frontier:
            for c, *_ in geo.successors(s):
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
        frontier = nxt
    assert len(seen) == 360
    from itertools import permutations

    for perm in permutations(range(6)):
        assert is_solvable(perm, 3) == (bytes(perm) in seen)


def test_random_walk_and_path_roundtrip():
    rng = random.Random(1)
    s = random_walk_instance(4, 30, rng=rng)
    assert s.solvable()
    geo = geometry(4, 4)
    states = [s.packed()]
    for _ in range(5):
        states.append(next(geo.successors(states[-1]))[0])
    moves = path_moves(states, 4, 4)
    assert len(moves) == 5
    assert s.apply(moves).packed() == states[-1]


def test_write_read_roundtrip(tmp_path):
    rng = random.Random(2)
    insts = [random_instance(3, 3, rng) for _ in range(3)]
    f = tmp_path / "set.txt"
    f.write_text("# three instances\n" + "\n".join(write_instance(s) for s in insts) + "\n\n")
    assert read_instances(f) == insts


def test_apply_rejects_illegal_move():
    with pytest.raises(ValueError):
        TileState.goal(3).apply("U")


def test_successors_symmetric():
    geo = geometry(3, 3)
    rng = random.Random(6)
    for _ in range(300):
        s = random_instance(3, 3, rng).packed()
        for child, *_ in geo.successors(s):
            assert s in [c for c, *_ in geo.successors(child)]


def test_write_normalizes():
    assert write_instance(parse_instance("  1 0 2\n3 4 5\n 6 7   8 ")) == "1 0 2 3 4 5 6 7 8"
