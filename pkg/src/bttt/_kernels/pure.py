"""Pure-Python kernel lane.

Semantics (including the random stream consumed by ``rollout``) are
bit-identical to the compiled lane in ``_core.pyx``; the parity tests in
tests/test_kernels.py hold both lanes to that.
"""
from __future__ import annotations

import math

import numpy as np

from .. import tables
from ..rng import PCG32

LANE = "pure"

_WIN = tables.WINDOWS
_WINDOWS_AT = tables.WINDOWS_AT
_CODE_VALUES = tables.CODE_VALUES
_C0, _C1, _C2, _C3 = (
    tables.WIN_COL0,
    tables.WIN_COL1,
    tables.WIN_COL2,
    tables.WIN_COL3,
)


def evaluate(cells: bytes) -> float:
    """Sum of the pattern-table values of all 88 windows."""
    arr = np.frombuffer(cells, dtype=np.uint8).astype(np.intp)
    codes = (arr[_C0] << 6) | (arr[_C1] << 4) | (arr[_C2] << 2) | arr[_C3]
    # left-to-right accumulation, matching the compiled lane bit-for-bit
    total = 0.0
    for v in _CODE_VALUES[codes]:
        total += v
    return total


def wins_at(cells, last: int) -> bool:
    """True if some window through `last` is uniform in the piece at `last`."""
    piece = cells[last]
    for w in _WINDOWS_AT[last]:
        a, b, c, d = _WIN[w]
        if cells[a] == piece and cells[b] == piece and cells[c] == piece and cells[d] == piece:
            return True
    return False


def uct_argmax(v, n, order, total: float, c: float) -> int:
    """Square maximizing v[s]/n[s] + c*sqrt(log(total)/n[s]) over `order`.

    `order` lists the candidate squares in ascending order, so ties resolve
    to the lowest square.  v and n are indexed by square.
    """
    log_total = math.log(total)
    best_sq, best_score = -1, -math.inf
    for s in order:
        ns = n[s]
        score = v[s] / ns + c * math.sqrt(log_total / ns)
        if score > best_score:
            best_sq, best_score = int(s), score
    return best_sq


def rollout(cells: bytes, side: int, seed: int) -> int:
    """Uniform random playout to termination; +1 for an O win, -1 for X.

    A board that fills without a four-in-a-row counts as an X win.
    """
    board = bytearray(cells)
    empties = [i for i in range(tables.N_SQUARES) if board[i] == tables.EMPTY]
    count = len(empties)
    rng = PCG32(seed)
    while count > 0:
        j = rng.randrange(count)
        sq = empties[j]
        board[sq] = side
        if wins_at(board, sq):
            return 1 if side == tables.O else -1
        count -= 1
        empties[j] = empties[count]
        side = tables.O + tables.X - side
    return -1
