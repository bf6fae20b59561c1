#!/usr/bin/env python3
"""Compares the compiled and pure-Python kernel lanes on the hot paths.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""
from __future__ import annotations

import argparse
import time

from bttt import tables
from bttt._kernels import pure
from bttt.board import Board
from bttt.mcts import MctsConfig, search
from bttt.rng import PCG32

try:
    from bttt._kernels import _core as compiled
    compiled.set_tables(tables.WINDOWS_FLAT, tables.CODE_VALUES,
                        tables.WINDOWS_AT_OFFSETS, tables.WINDOWS_AT_FLAT)
except ImportError:
    compiled = None


def time_it(fn, repeats):
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best


def sample_positions(n=50):
    rng = PCG32(1)
    boards = []
    while len(boards) < n:
        b = Board.new_game(rng.randrange(49))
        for _ in range(rng.randrange(20)):
            moves = b.legal_moves()
            if not moves or b.outcome != 0:
                break
            b = b.apply_move(rng.choice(moves))
        if b.outcome == 0:
            boards.append(b)
    return boards


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=200)
    args = ap.parse_args()

    boards = sample_positions()
    lanes = [("pure", pure)] + ([("compiled", compiled)] if compiled else [])
    rows = []

    for name, lane in lanes:
        rows.append((f"evaluate x50 [{name}]", time_it(
            lambda: [lane.evaluate(b.cells) for b in boards], args.repeats)))
        rows.append((f"wins_at x50 [{name}]", time_it(
            lambda: [lane.wins_at(b.cells, 24 if b.brick != 24 else 23) for b in boards],
            args.repeats)))
        rows.append((f"rollout x50 [{name}]", time_it(
            lambda: [lane.rollout(b.cells, b.side, i) for i, b in enumerate(boards)],
            max(1, args.repeats // 10))))

    import os
    start = Board.new_game("D4")
    for name in ("pure", "compiled") if compiled else ("pure",):
        os.environ["BTTT_KERNELS"] = name
        # mcts picks up its lane at import; report with the active module swapped
        import bttt._kernels as k
        import bttt.mcts as m
        lane = pure if name == "pure" else compiled
        k.evaluate, k.wins_at, k.rollout, k.uct_argmax, k.LANE = (
            lane.evaluate, lane.wins_at, lane.rollout, lane.uct_argmax, lane.LANE)
        m._kernels = k
        rows.append((f"mcts:1000 move [{name}]", time_it(
            lambda: search(start, MctsConfig(iterations=1000, seed=7)), 3)))

    width = max(len(r[0]) for r in rows)
    print(f"{'benchmark'.ljust(width)}  seconds")
    for label, secs in rows:
        print(f"{label.ljust(width)}  {secs:.6f}")
    if compiled:
        pure_ms = dict(rows)["mcts:1000 move [pure]"]
        comp_ms = dict(rows)["mcts:1000 move [compiled]"]
        print(f"\ncompiled lane speedup on mcts:1000: {pure_ms / comp_ms:.1f}x")


if __name__ == "__main__":
    main()
