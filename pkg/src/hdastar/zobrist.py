"""Zobrist keys over (tile, position) pairs and the key-to-worker map."""

from __future__ import annotations

import numpy as np

from .puzzle import TileState

MASK64 = (1 << 64) - 1


class ZobristTable:
    """64-bit random entries indexed ``[tile][position]``.

    Row 0 (the blank) is all zeros: the blank's position is implied by the
    other tiles, so leaving it out keeps a move update to two XORs.
    """

    def __init__(self, width: int, height: int | None = None, rng_seed: int = 0x5EED):
        height = width if height is None else height
        self.width = width
        self.height = height
        self.rng_seed = rng_seed
        n = width * height
        raw = np.random.default_rng(rng_seed).integers(0, 2**64, size=(n, n), dtype=np.uint64, endpoint=False)
        raw[0, :] = 0
        self.entries = raw
        # python ints are much faster to XOR than numpy scalars
        self._rows = [[int(v) for v in row] for row in raw]

    def hash(self, packed: bytes) -> int:
        rows = self._rows
        key = 0
        for pos, tile in enumerate(packed):
            if tile:
                key ^= rows[tile][pos]
        return key

    def update(self, key: int, tile: int, from_pos: int, to_pos: int) -> int:
        row = self._rows[tile]
        return key ^ row[from_pos] ^ row[to_pos]


def zobrist_hash(zt: ZobristTable, s: TileState | bytes) -> int:
    packed = s if isinstance(s, (bytes, bytearray)) else s.packed()
    return zt.hash(packed)


def zobrist_update(zt: ZobristTable, key: int, tile: int, from_pos: int, to_pos: int) -> int:
    return zt.update(key, tile, from_pos, to_pos)


def owner(key: int, p: int) -> int:
    """Worker that owns ``key`` among ``p`` workers."""
    if p < 1:
        raise ValueError("need at least one worker")
    return key % p
