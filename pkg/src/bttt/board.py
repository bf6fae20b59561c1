"""Board engine: state, legal moves, win detection, symmetries, game records.

The game: 7x7 grid, one unplayable brick square fixed at the start, O moves
first, first four-in-a-row (row/column/diagonal, no wraparound) wins.  A
filled board without a four-in-a-row counts as an X win, so there is no
draw outcome.

Boards are immutable snapshots; apply_move returns a new value, so search
trees can share parent states freely across threads.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

import numpy as np

from . import _kernels, tables
from .tables import BOARD_SIDE, BRICK, EMPTY, N_SQUARES, O, X

ROW_LABELS = "ABCDEFG"

ONGOING, O_WIN, X_WIN = 0, 1, 2
OUTCOME_NAMES = {ONGOING: "ongoing", O_WIN: "O", X_WIN: "X"}


class IllegalMove(Exception):
    """Move to an occupied/brick square or in a decided game (a caller bug)."""


class NoLegalMove(Exception):
    """An agent was asked to move in a decided game."""


class ParseError(Exception):
    """Malformed square name or game-record line."""


def parse_square(name: str) -> int:
    """'D4' -> 24.  Case-insensitive; row letter A-G then column digit 1-7."""
    s = name.strip().upper()
    if len(s) != 2 or s[0] not in ROW_LABELS or not s[1].isdigit():
        raise ParseError(f"bad square name {name!r} (expected e.g. 'D4', rows A-G, cols 1-7)")
    col = int(s[1]) - 1
    if not 0 <= col < BOARD_SIDE:
        raise ParseError(f"bad square name {name!r}: column out of range 1-7")
    return ROW_LABELS.index(s[0]) * BOARD_SIDE + col


def square_name(sq: int) -> str:
    if not 0 <= sq < N_SQUARES:
        raise ValueError(f"square index {sq} out of range")
    return f"{ROW_LABELS[sq // BOARD_SIDE]}{sq % BOARD_SIDE + 1}"


class Transform(Enum):
    """The reflection group of the board: each element is self-inverse."""

    IDENTITY = "identity"
    FLIP_H = "flip_h"
    FLIP_V = "flip_v"
    ROT180 = "rot180"

    @property
    def perm(self) -> np.ndarray:
        return tables.TRANSFORM_PERMS[self.value]

    def square(self, sq: int) -> int:
        return int(self.perm[sq])

    def policy(self, vec: np.ndarray) -> np.ndarray:
        out = np.empty_like(vec)
        out[self.perm] = vec
        return out

    def planes(self, planes: np.ndarray) -> np.ndarray:
        flat = planes.reshape(planes.shape[0], N_SQUARES)
        out = np.empty_like(flat)
        out[:, self.perm] = flat
        return out.reshape(planes.shape)


@dataclass(frozen=True)
class Board:
    """Immutable game state.

    cells holds one byte per square (EMPTY/O/X/BRICK); `side` is the player
    to move; `outcome` is cached at construction.
    """

    cells: bytes
    brick: int
    side: int
    move_count: int
    outcome: int

    @staticmethod
    def new_game(brick: int | str) -> "Board":
        if isinstance(brick, str):
            brick = parse_square(brick)
        if not 0 <= brick < N_SQUARES:
            raise ValueError(f"brick index {brick} out of range")
        cells = bytearray(N_SQUARES)
        cells[brick] = BRICK
        return Board(bytes(cells), brick, O, 0, ONGOING)

    def legal_moves(self) -> list[int]:
        if self.outcome != ONGOING:
            return []
        return [i for i in range(N_SQUARES) if self.cells[i] == EMPTY]

    def apply_move(self, sq: int) -> "Board":
        if self.outcome != ONGOING:
            raise IllegalMove(f"game already decided ({OUTCOME_NAMES[self.outcome]} won)")
        if not 0 <= sq < N_SQUARES or self.cells[sq] != EMPTY:
            raise IllegalMove(f"square {square_name(sq) if 0 <= sq < N_SQUARES else sq} not playable")
        cells = bytearray(self.cells)
        cells[sq] = self.side
        cells = bytes(cells)
        if _kernels.wins_at(cells, sq):
            outcome = O_WIN if self.side == O else X_WIN
        elif self.move_count + 1 == N_SQUARES - 1:
            outcome = X_WIN  # filled board goes to player 2
        else:
            outcome = ONGOING
        return Board(cells, self.brick, O + X - self.side, self.move_count + 1, outcome)

    def check_win_at(self, last: int) -> bool:
        """Incremental win test over the <=16 windows through `last`."""
        if self.cells[last] not in (O, X):
            raise ValueError(f"square {square_name(last)} holds no piece")
        return _kernels.wins_at(self.cells, last)

    def to_planes(self) -> np.ndarray:
        """3x7x7 binary stack: mover's pieces, opponent's pieces, brick."""
        arr = np.frombuffer(self.cells, dtype=np.uint8)
        planes = np.stack([
            arr == self.side,
            arr == O + X - self.side,
            arr == BRICK,
        ]).astype(np.float32)
        return planes.reshape(3, BOARD_SIDE, BOARD_SIDE)

    def transform(self, t: Transform) -> "Board":
        cells = bytearray(N_SQUARES)
        perm = t.perm
        for i in range(N_SQUARES):
            cells[perm[i]] = self.cells[i]
        return Board(bytes(cells), t.square(self.brick), self.side, self.move_count, self.outcome)

    def render(self) -> str:
        """ASCII board, row A at top."""
        chars = {EMPTY: ".", O: "O", X: "X", BRICK: "#"}
        lines = ["  " + " ".join(str(c + 1) for c in range(BOARD_SIDE))]
        for r in range(BOARD_SIDE):
            row = " ".join(chars[self.cells[r * BOARD_SIDE + c]] for c in range(BOARD_SIDE))
            lines.append(f"{ROW_LABELS[r]} {row}")
        return "\n".join(lines)


def outcome_of(b: Board) -> int:
    """Full-board outcome recomputation (the cached value is authoritative
    and equal; this exists as the non-incremental route)."""
    for win in tables.WINDOWS:
        piece = b.cells[win[0]]
        if piece in (O, X) and all(b.cells[s] == piece for s in win[1:]):
            return O_WIN if piece == O else X_WIN
    if all(c != EMPTY for c in b.cells):
        return X_WIN
    return ONGOING


@dataclass
class GameRecord:
    """One finished (or in-progress) game: brick, move list, result, metadata."""

    brick: int
    moves: list[int] = field(default_factory=list)
    result: int = ONGOING
    meta: dict | None = None

    def to_line(self) -> str:
        obj = {
            "brick": square_name(self.brick),
            "moves": [square_name(m) for m in self.moves],
            "result": OUTCOME_NAMES[self.result],
        }
        if self.meta is not None:
            obj["meta"] = self.meta
        return json.dumps(obj, separators=(",", ":"))

    @staticmethod
    def from_line(line: str, lineno: int | None = None) -> "GameRecord":
        where = "" if lineno is None else f" (line {lineno})"
        try:
            obj = json.loads(line)
            brick = parse_square(obj["brick"])
            moves = [parse_square(m) for m in obj["moves"]]
            result = {"O": O_WIN, "X": X_WIN, "ongoing": ONGOING}[obj["result"]]
        except (json.JSONDecodeError, KeyError, TypeError, ParseError) as e:
            raise ParseError(f"malformed game record{where}: {e}") from None
        return GameRecord(brick, moves, result, obj.get("meta"))

    def replay(self) -> Board:
        """Re-plays the moves, validating legality and the stored result."""
        b = Board.new_game(self.brick)
        for m in self.moves:
            b = b.apply_move(m)
        if self.result != ONGOING and b.outcome != self.result:
            raise ParseError(
                f"record result {OUTCOME_NAMES[self.result]} does not match replay "
                f"({OUTCOME_NAMES[b.outcome]})"
            )
        return b


def write_records(records: Iterable[GameRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(rec.to_line() + "\n")


def read_records(path) -> Iterator[GameRecord]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if line.strip():
                yield GameRecord.from_line(line, lineno)
