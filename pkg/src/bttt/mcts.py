"""UCT Monte Carlo tree search with uniform random rollouts.

Child selection uses UCB1 with exploration constant C (default 1); rewards
are kept in the O-positive frame (+1 O win, -1 X win) and sign-adjusted at
backpropagation: a node reached by an O move accumulates +r, one reached by
an X move accumulates -r, so both players argmax the same statistic.
"""
from __future__ import annotations

import math
from bisect import insort
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .board import Board, NoLegalMove, ONGOING, O_WIN, O
from .rng import PCG32


@dataclass
class MctsConfig:
    iterations: int = 1000
    c: float = 1.0
    seed: int = 0


class SearchNode:
    __slots__ = (
        "state", "n", "v", "children", "untried", "order", "order_arr",
        "arr_v", "arr_n", "parent", "square", "sign",
    )

    def __init__(self, state: Board, sign: int,
                 parent: "SearchNode | None" = None, square: int = -1):
        self.state = state
        self.n = 0
        self.v = 0.0
        self.children: dict[int, "SearchNode"] = {}
        self.untried = state.legal_moves()
        # child squares in ascending order, maintained at expansion so
        # selection never has to re-sort; order_arr is its int32 mirror
        self.order: list[int] = []
        self.order_arr = None
        # per-square child statistics, mirrored from the children by
        # backpropagate so selection can run in the kernel lane; allocated
        # at first expansion
        self.arr_v = None
        self.arr_n = None
        self.parent = parent
        self.square = square
        # +1 if this node was created by an O move (O is the maximizer)
        self.sign = sign

    def add_child(self, sq: int, child: "SearchNode") -> None:
        self.children[sq] = child
        insort(self.order, sq)
        if self.arr_v is None:
            self.arr_v = np.zeros(49)
            self.arr_n = np.zeros(49)
        self.order_arr = np.asarray(self.order, dtype=np.int32)


def uct_select(parent: SearchNode, c: float, total: int | None = None) -> int:
    """Square of the child maximizing UCB1; ties go to the lowest index.

    ``total`` is the summed visit count of parent's children; callers that
    already know it (search keeps it implicitly via the visit invariant) can
    pass it to skip the O(children) sum.
    """
    children = parent.children
    if total is None:
        total = sum(ch.n for ch in children.values())
    log_total = math.log(total)
    best_sq, best_score = -1, -math.inf
    for sq in parent.order or sorted(children):
        ch = children[sq]
        score = ch.v / ch.n + c * math.sqrt(log_total / ch.n)
        if score > best_score:
            best_sq, best_score = sq, score
    return best_sq


def rollout(b: Board, rng: PCG32) -> int:
    """Uniform random playout from b; +1 for an O win, -1 for an X win.

    The draw branch of the generic reward scheme is unreachable: a filled
    board is an X win by rule.
    """
    if b.outcome != ONGOING:
        return 1 if b.outcome == O_WIN else -1
    return _kernels.rollout(b.cells, b.side, rng.next_u64())


def backpropagate(path: list[SearchNode], r: int) -> None:
    """Adds one visit to every node on the path, sign-adjusting the reward so
    each node's v/n is in its own mover-to-choose frame.  The parents' stat
    arrays are kept in step so kernel selection sees current values."""
    for visited in path:
        visited.n += 1
        visited.v += visited.sign * r
        p = visited.parent
        if p is not None:
            p.arr_n[visited.square] = visited.n
            p.arr_v[visited.square] = visited.v


def search(b: Board, cfg: MctsConfig, return_root: bool = False):
    """Runs cfg.iterations of select/expand/rollout/backpropagate from b and
    returns the most-visited root move (ties: lowest index)."""
    if b.outcome != ONGOING:
        raise NoLegalMove("search on a decided board")
    rng = PCG32(cfg.seed)
    root = SearchNode(b, -1 if b.side == O else 1)
    for _ in range(cfg.iterations):
        node = root
        path = [root]
        while not node.untried and node.children:
            # every past visit to a fully expanded node descended into a
            # child, except the single rollout visit that created it (the
            # root was never created by a descent, so it has no such offset)
            total = node.n if node is root else node.n - 1
            # kernel twin of uct_select; same expression, same tie-break
            sq = _kernels.uct_argmax(node.arr_v, node.arr_n, node.order_arr,
                                     total, cfg.c)
            node = node.children[sq]
            path.append(node)
        if node.untried and node.state.outcome == ONGOING:
            sq = node.untried.pop(rng.randrange(len(node.untried)))
            child = SearchNode(node.state.apply_move(sq),
                               1 if node.state.side == O else -1, node, sq)
            node.add_child(sq, child)
            path.append(child)
            node = child
        r = rollout(node.state, rng)
        backpropagate(path, r)
    best_sq = max(sorted(root.children), key=lambda sq: root.children[sq].n)
    return (best_sq, root) if return_root else best_sq
