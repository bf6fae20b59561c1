"""Two-ply minimax with alpha-beta pruning over the window heuristic.

O maximizes, X minimizes.  Expansion stops at decided boards; a terminal or
depth-0 board is scored by the heuristic directly.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

from .board import Board, NoLegalMove, ONGOING, O
from .heuristic import evaluate
from .rng import PCG32

FIRST_INDEX = "first_index"
SEEDED_RANDOM = "seeded_random"


@dataclass
class MinimaxConfig:
    depth: int = 2
    tie_break: str = FIRST_INDEX
    seed: int = 0


def minimax_value(b: Board, depth: int, alpha: float = -math.inf, beta: float = math.inf) -> float:
    """Alpha-beta minimax value; equals the unpruned value for a root call."""
    if depth <= 0 or b.outcome != ONGOING:
        return evaluate(b)
    if b.side == O:
        value = -math.inf
        for sq in b.legal_moves():
            value = max(value, minimax_value(b.apply_move(sq), depth - 1, alpha, beta))
            alpha = max(alpha, value)
            if alpha >= beta:
                break
        return value
    value = math.inf
    for sq in b.legal_moves():
        value = min(value, minimax_value(b.apply_move(sq), depth - 1, alpha, beta))
        beta = min(beta, value)
        if alpha >= beta:
            break
    return value


def _root_values(b: Board, depth: int, prune: bool) -> list[tuple[int, float]]:
    # With pruning, inner cutoffs fire only on strict non-improvement, so the
    # running best (and its first-index argmax) stays exact; returned values
    # for non-best moves may be bounds.
    maximizing = b.side == O
    best = -math.inf if maximizing else math.inf
    out = []
    for sq in b.legal_moves():
        child = b.apply_move(sq)
        if prune:
            if maximizing:
                v = minimax_value(child, depth - 1, best, math.inf)
            else:
                v = minimax_value(child, depth - 1, -math.inf, best)
        else:
            v = minimax_value(child, depth - 1)
        out.append((sq, v))
        best = max(best, v) if maximizing else min(best, v)
    return out


def select_move(b: Board, cfg: MinimaxConfig | None = None) -> int:
    """Argmax (O) / argmin (X) over legal moves of the depth-limited value."""
    cfg = cfg or MinimaxConfig()
    if b.outcome != ONGOING:
        raise NoLegalMove("select_move on a decided board")
    # Seeded-random tie-breaking needs exact values for the whole tie set,
    # so that mode runs full-width.
    prune = cfg.tie_break == FIRST_INDEX
    values = _root_values(b, cfg.depth, prune)
    sign = 1.0 if b.side == O else -1.0
    best = max(sign * v for _, v in values)
    ties = [sq for sq, v in values if sign * v == best]
    if cfg.tie_break == SEEDED_RANDOM:
        return PCG32(cfg.seed ^ zlib.crc32(b.cells)).choice(ties)
    return ties[0]
