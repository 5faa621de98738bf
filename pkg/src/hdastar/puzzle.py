"""Sliding-tile puzzle domain.

States are permutations of ``0 .. w*h-1`` stored row-major, ``0`` being the
blank.  The goal has the blank in position 0 followed by the tiles in
ascending order (Korf's convention).

The search code works on the packed form (``bytes``) because it is compact,
hashable and cheap to copy; :class:`TileState` is the validated public face.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

# blank movement letters; "U" means the blank moves one row up
MOVES = {"U": (-1, 0), "D": (1, 0), "L": (0, -1), "R": (0, 1)}
INVERSE = {"U": "D", "D": "U", "L": "R", "R": "L"}

_SQUARE_SIZES = {9: (3, 3), 16: (4, 4), 25: (5, 5), 36: (6, 6)}


class InstanceError(ValueError):
    """Raised for malformed or unsolvable puzzle instances."""


def _inversions(tiles: Sequence[int]) -> int:
    seq = [t for t in tiles if t != 0]
    inv = 0
    for i in range(len(seq)):
        ti = seq[i]
        for j in range(i + 1, len(seq)):
            if seq[j] < ti:
                inv += 1
    return inv


def is_solvable(tiles: Sequence[int], width: int) -> bool:
    """Parity test against the blank-first goal."""
    inv = _inversions(tiles)
    if width % 2 == 1:
        return inv % 2 == 0
    blank_row = list(tiles).index(0) // width
    return (inv + blank_row) % 2 == 0


@dataclass(frozen=True)
class TileState:
    tiles: tuple[int, ...]
    width: int
    height: int

    def __post_init__(self) -> None:
        n = self.width * self.height
        if self.width < 1 or self.height < 1:
            raise InstanceError("board dimensions must be positive")
        if len(self.tiles) != n:
            raise InstanceError(f"expected {n} tiles, got {len(self.tiles)}")
        if sorted(self.tiles) != list(range(n)):
            raise InstanceError("tiles are not a permutation of 0..%d" % (n - 1))

    @classmethod
    def goal(cls, width: int, height: int | None = None) -> "TileState":
        height = width if height is None else height
        return cls(tuple(range(width * height)), width, height)

    @classmethod
    def from_packed(cls, packed: bytes, width: int, height: int) -> "TileState":
        return cls(tuple(packed), width, height)

    def packed(self) -> bytes:
        return bytes(self.tiles)

    @property
    def blank(self) -> int:
        return self.tiles.index(0)

    def is_goal(self) -> bool:
        return all(t == i for i, t in enumerate(self.tiles))

    def solvable(self) -> bool:
        return is_solvable(self.tiles, self.width)

    def apply(self, moves: Iterable[str]) -> "TileState":
        """Apply blank moves (letters from ``MOVES``); illegal moves raise."""
        geo = geometry(self.width, self.height)
        packed = self.packed()
        for m in moves:
            packed = geo.move(packed, m)
        return TileState(tuple(packed), self.width, self.height)

    def __str__(self) -> str:
        return write_instance(self)


class Geometry:
    """Precomputed move tables for one board size."""

    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.size = width * height
        # neighbours[pos] -> list of (new blank position, move letter)
        self.neighbours: list[list[tuple[int, str]]] = []
        for pos in range(self.size):
            r, c = divmod(pos, width)
            out = []
            for letter, (dr, dc) in MOVES.items():
                nr, nc = r + dr, c + dc
                if 0 <= nr < height and 0 <= nc < width:
                    out.append((nr * width + nc, letter))
            self.neighbours.append(out)
        self.goal = bytes(range(self.size))
        # manhattan[tile][pos]
        self.manhattan_table = [[0] * self.size for _ in range(self.size)]
        for tile in range(1, self.size):
            gr, gc = divmod(tile, width)
            for pos in range(self.size):
                r, c = divmod(pos, width)
                self.manhattan_table[tile][pos] = abs(r - gr) + abs(c - gc)

    def successors(self, packed: bytes) -> Iterator[tuple[bytes, int, int, int, str]]:
        """Yield ``(child, moved_tile, from_pos, to_pos, letter)``.

        ``from_pos``/``to_pos`` describe the slid tile, which travels into the
        old blank cell.
        """
        blank = packed.index(0)
        for nb, letter in self.neighbours[blank]:
            child = bytearray(packed)
            tile = child[nb]
            child[blank] = tile
            child[nb] = 0
            yield bytes(child), tile, nb, blank, letter

    def move(self, packed: bytes, letter: str) -> bytes:
        blank = packed.index(0)
        for nb, lt in self.neighbours[blank]:
            if lt == letter:
                child = bytearray(packed)
                child[blank] = child[nb]
                child[nb] = 0
                return bytes(child)
        raise InstanceError(f"illegal move {letter!r} with blank at {blank}")

    def move_between(self, parent: bytes, child: bytes) -> str:
        src = parent.index(0)
        dst = child.index(0)
        for nb, letter in self.neighbours[src]:
            if nb == dst:
                return letter
        raise ValueError("states are not adjacent")

    def manhattan(self, packed: bytes) -> int:
        table = self.manhattan_table
        return sum(table[t][i] for i, t in enumerate(packed) if t)


@lru_cache(maxsize=None)
def geometry(width: int, height: int) -> Geometry:
    return Geometry(width, height)


def successors(s: TileState) -> list[tuple[TileState, int]]:
    """All states one blank move away, each with unit cost."""
    geo = geometry(s.width, s.height)
    return [
        (TileState(tuple(child), s.width, s.height), 1)
        for child, *_ in geo.successors(s.packed())
    ]


def manhattan(s: TileState) -> int:
    return geometry(s.width, s.height).manhattan(s.packed())


def path_moves(states: Sequence[bytes], width: int, height: int) -> str:
    geo = geometry(width, height)
    return "".join(geo.move_between(a, b) for a, b in zip(states, states[1:]))


# --- instance text format -------------------------------------------------

def parse_instance(
    text: str,
    width: int | None = None,
    height: int | None = None,
    allow_unsolvable: bool = False,
) -> TileState:
    """Parse a whitespace-separated tile permutation (blank = 0)."""
    try:
        tiles = tuple(int(tok) for tok in text.split())
    except ValueError as exc:
        raise InstanceError(f"non-integer token in instance: {exc}") from None
    n = len(tiles)
    if width is None and height is None:
        if n not in _SQUARE_SIZES:
            side = math.isqrt(n)
            raise InstanceError(
                f"cannot infer board size from {n} tiles"
                + ("" if side * side == n else " (not a square count)")
            )
        width, height = _SQUARE_SIZES[n]
    elif width is None or height is None:
        width = width or n // height
        height = height or n // width
    if width * height != n:
        raise InstanceError(f"expected {width * height} tiles, got {n}")
    if sorted(tiles) != list(range(n)):
        missing = sorted(set(range(n)) - set(tiles))
        raise InstanceError(f"not a permutation of 0..{n - 1} (missing {missing})")
    state = TileState(tiles, width, height)
    if not allow_unsolvable and not state.solvable():
        raise InstanceError("instance is unsolvable (wrong permutation parity)")
    return state


def write_instance(s: TileState) -> str:
    return " ".join(str(t) for t in s.tiles)


def read_instances(path, allow_unsolvable: bool = False) -> list[TileState]:
    """One instance per line; blank lines and ``#`` comments ignored."""
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                out.append(parse_instance(line, allow_unsolvable=allow_unsolvable))
    return out


# --- instance generators --------------------------------------------------

def random_instance(width: int, height: int | None = None, rng: random.Random | None = None) -> TileState:
    """Uniformly random solvable instance."""
    height = width if height is None else height
    rng = rng or random.Random()
    tiles = list(range(width * height))
    while True:
        rng.shuffle(tiles)
        if is_solvable(tiles, width):
            return TileState(tuple(tiles), width, height)


def random_walk_instance(
    width: int, steps: int, height: int | None = None, rng: random.Random | None = None
) -> TileState:
    """Scramble the goal with ``steps`` random moves, never undoing the last one."""
    height = width if height is None else height
    rng = rng or random.Random()
    geo = geometry(width, height)
    packed = geo.goal
    last = None
    for _ in range(steps):
        options = [lt for _, lt in geo.neighbours[packed.index(0)] if lt != INVERSE.get(last)]
        last = rng.choice(options)
        packed = geo.move(packed, last)
    return TileState(tuple(packed), width, height)
