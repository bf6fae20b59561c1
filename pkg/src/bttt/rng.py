"""Deterministic PCG32 generator.

Hand-rolled so the pure-Python and compiled kernel lanes can share one
bit-identical random stream (the stdlib Mersenne Twister is not practical
to replicate in C).
"""
from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1
_MULT = 6364136223846793005


class PCG32:
    """PCG-XSH-RR 32-bit generator (O'Neill 2014)."""

    __slots__ = ("state", "inc")

    def __init__(self, seed: int, seq: int = 0):
        self.state = 0
        self.inc = ((seq << 1) | 1) & _MASK64
        self._step()
        self.state = (self.state + (seed & _MASK64)) & _MASK64
        self._step()

    def _step(self) -> None:
        self.state = (self.state * _MULT + self.inc) & _MASK64

    def next_u32(self) -> int:
        s = self.state
        self._step()
        xorshifted = (((s >> 18) ^ s) >> 27) & 0xFFFFFFFF
        rot = s >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF

    def next_u64(self) -> int:
        return (self.next_u32() << 32) | self.next_u32()

    def randrange(self, n: int) -> int:
        return self.next_u32() % n

    def random(self) -> float:
        return self.next_u32() / 4294967296.0

    def choice(self, seq):
        return seq[self.randrange(len(seq))]


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary labelled parts.

    Adding new pairings/games to a run never perturbs seeds of existing ones.
    """
    h = hashlib.sha256(repr(parts).encode()).digest()
    return int.from_bytes(h[:8], "little")
