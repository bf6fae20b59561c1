"""Shared helpers: random position generators and a draw-free filled board."""
from __future__ import annotations

import numpy as np

from bttt.board import Board, ONGOING
from bttt.rng import PCG32
from bttt.tables import BRICK, EMPTY, N_SQUARES, O, X


def random_playout(rng: PCG32, brick: int | None = None) -> list[Board]:
    """Plays uniformly random legal moves to termination; returns every state
    from the initial board to the terminal one."""
    b = Board.new_game(rng.randrange(N_SQUARES) if brick is None else brick)
    states = [b]
    while b.outcome == ONGOING:
        b = b.apply_move(rng.choice(b.legal_moves()))
        states.append(b)
    return states


def random_board(rng: PCG32, max_plies: int = 20) -> Board:
    """A random legal position: a prefix of a random playout."""
    states = random_playout(rng)
    # ongoing states only (terminal positions are exercised separately)
    cut = rng.randrange(min(max_plies, len(states) - 1) + 1)
    return states[min(cut, len(states) - 2)]


def full_board_no_line() -> Board:
    """A legal-shaped 48-piece board where no window is uniform.

    Built from a 2-row-period pattern (complementary row types, so every
    vertical/diagonal window mixes colors) and repaired by local swaps if the
    brick substitution introduces a uniform line.
    """
    pat_a = [O, O, X, X, O, O, X]
    row_type = [0, 0, 1, 1, 0, 0, 1]
    cells = bytearray(49)
    for r in range(7):
        for c in range(7):
            v = pat_a[c] if row_type[r] == 0 else (O + X - pat_a[c])
            cells[r * 7 + c] = v
    brick = 24
    cells[brick] = BRICK

    from bttt.tables import WINDOWS

    def bad_windows():
        return [w for w in WINDOWS
                if cells[w[0]] in (O, X) and all(cells[s] == cells[w[0]] for s in w[1:])]

    rng = PCG32(7)
    while bad_windows():
        w = bad_windows()[0]
        s = w[rng.randrange(4)]
        others = [i for i in range(49) if cells[i] in (O, X) and cells[i] != cells[s]]
        t = rng.choice(others)
        cells[s], cells[t] = cells[t], cells[s]
    board = Board(bytes(cells), brick, X, 48, 2)
    assert not bad_windows() and all(c != EMPTY for c in cells)
    return board


def one_move_left_board() -> Board:
    """An ongoing 47-piece position with exactly one legal move."""
    full = full_board_no_line()
    cells = bytearray(full.cells)
    # remove one X so the side to move is X and the position is ongoing
    last = next(i for i in range(49) if cells[i] == X)
    cells[last] = EMPTY
    b = Board(bytes(cells), full.brick, X, 47, ONGOING)
    assert b.legal_moves() == [last]
    return b


def batch_from_boards(boards):
    """(planes, masks) arrays for a list of ongoing boards."""
    planes = np.stack([b.to_planes() for b in boards])
    masks = np.stack([np.frombuffer(b.cells, dtype=np.uint8) == EMPTY for b in boards])
    return planes, masks
