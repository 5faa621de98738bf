import random
from collections import deque

import pytest

from hdastar.heuristics import Manhattan
from hdastar.puzzle import geometry, random_instance, random_walk_instance


def bfs_distances(width: int, height: int) -> dict[bytes, int]:
    """Uninformed breadth-first distances from the goal to every reachable state."""
    geo = geometry(width, height)
    dist = {geo.goal: 0}
    queue = deque([geo.goal])
    while queue:
        s = queue.popleft()
        d = dist[s] + 1
        for child, *_ in geo.successors(s):
            if child not in dist:
                dist[child] = d
                queue.append(child)
    return dist


@pytest.fixture(scope="session")
def bfs8():
    return bfs_distances(3, 3)


@pytest.fixture(scope="session")
def h8():
    return Manhattan(3, 3)


@pytest.fixture(scope="session")
def h15():
    return Manhattan(4, 4)


def eight_puzzles(n: int, seed: int):
    rng = random.Random(seed)
    return [random_instance(3, 3, rng) for _ in range(n)]


def fifteen_puzzles(n: int, seed: int, steps: int = 60):
    rng = random.Random(seed)
    return [random_walk_instance(4, steps, rng=rng) for _ in range(n)]
