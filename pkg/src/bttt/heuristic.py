"""Hand-crafted positional value function used by the minimax agent.

Each of the 88 four-in-a-row windows is scored from a fixed lookup table
over its contents; the board value is the sum.  Positive favors O, negative
favors X; O magnitudes are 1.5x the X ones so that X is pushed to block.
Windows containing a brick or pieces of both colors score 0.
"""
from __future__ import annotations

from . import _kernels, tables
from .board import Board
from .tables import PATTERN_VALUES

_PIECE_CHAR = {tables.EMPTY: "_", tables.O: "O", tables.X: "X", tables.BRICK: "B"}


def window_value(cells) -> float:
    """Value of one 4-cell window (a sequence of piece codes)."""
    if len(cells) != 4:
        raise ValueError("a window has exactly 4 cells")
    pattern = "".join(_PIECE_CHAR[c] for c in cells)
    return PATTERN_VALUES.get(pattern, 0.0)


def evaluate(b: Board) -> float:
    """Sum of window_value over all 88 windows (kernel-accelerated)."""
    return _kernels.evaluate(b.cells)


def evaluate_naive(b: Board) -> float:
    """Window-by-window re-extraction; the oracle route for evaluate()."""
    return sum(window_value([b.cells[s] for s in win]) for win in tables.WINDOWS)
