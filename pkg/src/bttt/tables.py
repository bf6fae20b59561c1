"""Precomputed lookup tables shared by the board engine, heuristic and kernels.

Everything here is derived once at import time from the board geometry:
the 88 four-in-a-row windows of the 7x7 grid, the per-square window index,
the 256-entry window-pattern value table, and the symmetry permutations.
"""
from __future__ import annotations

import numpy as np

BOARD_SIDE = 7
N_SQUARES = BOARD_SIDE * BOARD_SIDE
WIN_LENGTH = 4

EMPTY, O, X, BRICK = 0, 1, 2, 3


def _enumerate_windows() -> list[tuple[int, ...]]:
    wins = []
    for r in range(BOARD_SIDE):
        for c in range(BOARD_SIDE - WIN_LENGTH + 1):
            wins.append(tuple(r * BOARD_SIDE + c + k for k in range(WIN_LENGTH)))
    for c in range(BOARD_SIDE):
        for r in range(BOARD_SIDE - WIN_LENGTH + 1):
            wins.append(tuple((r + k) * BOARD_SIDE + c for k in range(WIN_LENGTH)))
    for r in range(BOARD_SIDE - WIN_LENGTH + 1):
        for c in range(BOARD_SIDE - WIN_LENGTH + 1):
            wins.append(tuple((r + k) * BOARD_SIDE + (c + k) for k in range(WIN_LENGTH)))
    for r in range(BOARD_SIDE - WIN_LENGTH + 1):
        for c in range(WIN_LENGTH - 1, BOARD_SIDE):
            wins.append(tuple((r + k) * BOARD_SIDE + (c - k) for k in range(WIN_LENGTH)))
    return wins


WINDOWS: tuple[tuple[int, ...], ...] = tuple(_enumerate_windows())
N_WINDOWS = len(WINDOWS)  # 88: 28 row + 28 column + 16 + 16 diagonal

#: for each square, the indices (into WINDOWS) of every window containing it
WINDOWS_AT: tuple[tuple[int, ...], ...] = tuple(
    tuple(w for w, win in enumerate(WINDOWS) if sq in win) for sq in range(N_SQUARES)
)

# Window pattern values.  Keys are 4-character strings over {O, X, _} read in
# window order; any pattern not listed (mixed pieces, or containing a brick)
# scores 0.  O-side magnitudes are 1.5x the X-side ones.
PATTERN_VALUES: dict[str, float] = {
    "X___": -0.000001, "___X": -0.000001,
    "_X__": -0.000002, "__X_": -0.000002,
    "X_X_": -0.0001, "X__X": -0.0001, "_X_X": -0.0001,
    "XX__": -0.0001, "__XX": -0.0001,
    "_XX_": -0.0002,
    "X_XX": -0.01, "XX_X": -0.01, "XXX_": -0.01, "_XXX": -0.01,
    "XXXX": -1.0,
    "O___": 0.0000015, "___O": 0.0000015,
    "_O__": 0.000003, "__O_": 0.000003,
    "O_O_": 0.00015, "O__O": 0.00015, "_O_O": 0.00015,
    "OO__": 0.00015, "__OO": 0.00015,
    "_OO_": 0.0003,
    "O_OO": 0.015, "OO_O": 0.015, "OOO_": 0.015, "_OOO": 0.015,
    "OOOO": 1.5,
}

_PIECE_CHAR = {EMPTY: "_", O: "O", X: "X", BRICK: "B"}


def _pattern_code_values() -> np.ndarray:
    """Value of each of the 4^4 window contents, indexed base-4 big-endian."""
    values = np.zeros(256, dtype=np.float64)
    for code in range(256):
        cells = (code >> 6 & 3, code >> 4 & 3, code >> 2 & 3, code & 3)
        pattern = "".join(_PIECE_CHAR[c] for c in cells)
        values[code] = PATTERN_VALUES.get(pattern, 0.0)
    return values


CODE_VALUES: np.ndarray = _pattern_code_values()

# Flattened int32 views consumed by the compiled/pure kernels.
WINDOWS_FLAT = np.asarray(WINDOWS, dtype=np.int32).reshape(-1)
WINDOWS_AT_OFFSETS = np.zeros(N_SQUARES + 1, dtype=np.int32)
for _sq in range(N_SQUARES):
    WINDOWS_AT_OFFSETS[_sq + 1] = WINDOWS_AT_OFFSETS[_sq] + len(WINDOWS_AT[_sq])
WINDOWS_AT_FLAT = np.asarray(
    [w for sq in range(N_SQUARES) for w in WINDOWS_AT[sq]], dtype=np.int32
)

# Columnar window layout for vectorized evaluation.
_WARR = np.asarray(WINDOWS, dtype=np.intp)
WIN_COL0, WIN_COL1, WIN_COL2, WIN_COL3 = (_WARR[:, k] for k in range(4))


def _perm(fn) -> np.ndarray:
    out = np.empty(N_SQUARES, dtype=np.intp)
    for r in range(BOARD_SIDE):
        for c in range(BOARD_SIDE):
            rr, cc = fn(r, c)
            out[r * BOARD_SIDE + c] = rr * BOARD_SIDE + cc
    return out


#: square permutations of the reflection group {id, flip_h, flip_v, rot180}
TRANSFORM_PERMS: dict[str, np.ndarray] = {
    "identity": _perm(lambda r, c: (r, c)),
    "flip_h": _perm(lambda r, c: (r, BOARD_SIDE - 1 - c)),
    "flip_v": _perm(lambda r, c: (BOARD_SIDE - 1 - r, c)),
    "rot180": _perm(lambda r, c: (BOARD_SIDE - 1 - r, BOARD_SIDE - 1 - c)),
}
