"""Command-line entry point.

Subcommands: train, tournament, eval-all, bench, play.  All game logic lives
in the library; this module only wires configs to it.  Exit codes: 0 ok,
2 config error, 3 I/O error, 4 missing checkpoint.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from . import agents, azero, tournament
from .board import (
    Board, GameRecord, IllegalMove, ONGOING, O_WIN, ParseError, parse_square, square_name,
)

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_CKPT = 0, 2, 3, 4


class ConfigError(Exception):
    pass


def _load_config(path, allowed: set[str]) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            cfg = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}")
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"config {path}: unknown keys {sorted(unknown)}; allowed: {sorted(allowed)}")
    return cfg


def _parse_brick_pool(text: str) -> tuple[str, ...]:
    pool = []
    for part in text.split(","):
        sq = parse_square(part)  # ParseError names the grammar
        pool.append(square_name(sq))
    return tuple(pool)


def _out_dir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


SCALES = {
    "desk": {"filters": 24, "residual_blocks": 2, "total_iterations": 40},
    "paper": {"filters": 75, "residual_blocks": 5, "total_iterations": 850},
}

_TRAIN_KEYS = {f.name for f in dataclasses.fields(azero.TrainConfig)}


def cmd_train(args) -> int:
    overrides = {}
    if args.config:
        overrides.update(_load_config(args.config, _TRAIN_KEYS))
    if args.scale:
        overrides = {**SCALES[args.scale], **overrides}
    if args.brick_pool:
        overrides["brick_pool"] = _parse_brick_pool(args.brick_pool)
    if args.iterations is not None:
        overrides["total_iterations"] = args.iterations
    if args.simulations is not None:
        overrides["simulations"] = args.simulations
    overrides.setdefault("seed", args.seed)
    overrides["out_dir"] = _out_dir(args)
    cfg = azero.TrainConfig(**overrides)
    with open(os.path.join(cfg.out_dir, "train_config.json"), "w") as f:
        json.dump(dataclasses.asdict(cfg), f, indent=2, sort_keys=True)
        f.write("\n")
    final = azero.train(cfg)
    print(f"final checkpoint: {final}")
    return EXIT_OK


def cmd_tournament(args) -> int:
    specs = [s.strip() for s in args.agents.split(",") if s.strip()]
    if len(specs) < 2:
        raise ConfigError("tournament needs at least 2 agents (--agents a,b,...)")
    agents.validate_specs(specs)
    table = tournament.round_robin(specs, brick=args.brick, games=args.games,
                                   base_seed=args.seed, workers=args.workers)
    out = _out_dir(args)
    csv_path = os.path.join(out, "results.csv")
    tournament.emit_results(table, csv_path)
    tournament.write_manifest(os.path.join(out, "manifest.json"), "tournament",
                              {"agents": specs, "brick": args.brick, "games": args.games,
                               "seed": args.seed, "workers": args.workers}, specs)
    print(table.to_csv(), end="")
    print(f"wrote {csv_path}", file=sys.stderr)
    return EXIT_OK


def cmd_eval_all(args) -> int:
    agents.validate_specs([args.player1, args.player2])
    table, agg = tournament.eval_all_positions(
        args.player1, args.player2, games_per_pos=args.games_per_pos,
        base_seed=args.seed, workers=args.workers)
    out = _out_dir(args)
    csv_path = os.path.join(out, "results.csv")
    tournament.emit_results(table, csv_path)
    tournament.write_manifest(os.path.join(out, "manifest.json"), "eval-all",
                              {"player1": args.player1, "player2": args.player2,
                               "games_per_pos": args.games_per_pos, "seed": args.seed},
                              [args.player1, args.player2])
    print(table.to_csv(), end="")
    print(f"aggregate: {agg['wins1']} - {agg['wins2']} "
          f"({100 * agg['win_rate1']:.1f}% for {args.player1} as P1)")
    return EXIT_OK


def cmd_bench(args) -> int:
    specs = [s.strip() for s in args.agents.split(",") if s.strip()]
    agents.validate_specs(specs)
    out = _out_dir(args)
    results = []
    for spec in specs:
        r = tournament.bench_time_per_move(spec, brick=args.brick,
                                           n_moves=args.n_moves, base_seed=args.seed)
        results.append(r)
        print(f"{spec}: {r['mean_s']:.6f} s/move (std {r['std_s']:.6f}, n={r['n_moves']})")
    with open(os.path.join(out, "bench.json"), "w") as f:
        json.dump(results, f, indent=2)
        f.write("\n")
    tournament.write_manifest(os.path.join(out, "manifest.json"), "bench",
                              {"agents": specs, "brick": args.brick,
                               "n_moves": args.n_moves, "seed": args.seed}, specs)
    return EXIT_OK


def cmd_play(args) -> int:
    agent = agents.resolve_agent(args.agent, args.seed)
    human = args.human.upper()
    if human not in ("O", "X"):
        raise ConfigError("--human must be O or X")
    human_side = 1 if human == "O" else 2
    b = Board.new_game(args.brick)
    record = GameRecord(b.brick, meta={"agent": args.agent, "human": human})
    print(b.render())
    try:
        while b.outcome == ONGOING:
            if b.side == human_side:
                entry = input(f"your move ({human}): ")
                try:
                    move = parse_square(entry)
                    b2 = b.apply_move(move)
                except (ParseError, IllegalMove) as e:
                    print(f"  illegal: {e}")
                    continue
            else:
                move = agent.select_move(b)
                print(f"{args.agent} plays {square_name(move)}")
                b2 = b.apply_move(move)
            b = b2
            record.moves.append(move)
            print(b.render())
        record.result = b.outcome
        print("O wins" if b.outcome == O_WIN else "X wins")
    except (EOFError, KeyboardInterrupt):
        print("\ninterrupted", file=sys.stderr)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "game.jsonl")
        with open(path, "a") as f:
            f.write(record.to_line() + "\n")
        print(f"saved record to {path}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bttt", description=__doc__)
    p.add_argument("--seed", type=int, default=0, help="base seed for the run")
    p.add_argument("--workers", type=int, default=1, help="parallel game workers")
    p.add_argument("--out", default="runs/out", help="output directory")
    p.add_argument("--config", help="JSON config file (flags override)")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="self-play training run")
    t.add_argument("--brick-pool", help="comma-separated bricks, e.g. C3,D3,D4")
    t.add_argument("--iterations", type=int)
    t.add_argument("--simulations", type=int)
    t.add_argument("--scale", choices=sorted(SCALES))
    t.set_defaults(fn=cmd_train)

    r = sub.add_parser("tournament", help="round-robin over ordered agent pairs")
    r.add_argument("--agents", required=True, help="comma-separated agent specs")
    r.add_argument("--brick", default="E5")
    r.add_argument("--games", type=int, default=100)
    r.set_defaults(fn=cmd_tournament)

    e = sub.add_parser("eval-all", help="49-brick-position evaluation")
    e.add_argument("--player1", required=True)
    e.add_argument("--player2", required=True)
    e.add_argument("--games-per-pos", type=int, default=10)
    e.set_defaults(fn=cmd_eval_all)

    bn = sub.add_parser("bench", help="seconds-per-move benchmark")
    bn.add_argument("--agents", required=True)
    bn.add_argument("--brick", default="D4")
    bn.add_argument("--n-moves", type=int, default=100)
    bn.set_defaults(fn=cmd_bench)

    g = sub.add_parser("play", help="interactive terminal game")
    g.add_argument("--agent", default="mcts:1000")
    g.add_argument("--brick", default="D4")
    g.add_argument("--human", default="O", help="side you play: O or X")
    g.set_defaults(fn=cmd_play)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ParseError, agents.UnknownAgent, TypeError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except agents.MissingCheckpoint as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CKPT
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
