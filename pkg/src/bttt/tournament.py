"""Match runner, round-robin tournaments, all-position evaluation, timing.

Player 1 is always O (no color alternation; result tables are asymmetric by
design).  Game k of a pairing uses seeds derived from (base_seed, pairing,
k), so adding pairings or games never perturbs existing ones, and identical
configs reproduce identical tables even for stochastic agents.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from . import _kernels
from .agents import resolve_agent, validate_specs
from .board import Board, GameRecord, ONGOING, O_WIN, parse_square, square_name
from .rng import derive_seed

CSV_HEADER = ["player1", "player2", "brick", "wins1", "wins2", "games",
              "mean_time1_s", "mean_time2_s"]


class AgentFailure(Exception):
    pass


@dataclass
class MatchConfig:
    player1: str
    player2: str
    brick: str = "D4"
    games: int = 100
    base_seed: int = 0
    record_games: bool = False
    workers: int = 1


@dataclass
class ResultRow:
    player1: str
    player2: str
    brick: str
    wins1: int
    wins2: int
    games: int
    mean_time1_s: float
    mean_time2_s: float


@dataclass
class ResultsTable:
    rows: list[ResultRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.player1, r.player2, r.brick, r.wins1, r.wins2, r.games,
                        repr(r.mean_time1_s), repr(r.mean_time2_s)])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "ResultsTable":
        rows = []
        reader = csv.DictReader(io.StringIO(text))
        for rec in reader:
            rows.append(ResultRow(
                rec["player1"], rec["player2"], rec["brick"],
                int(rec["wins1"]), int(rec["wins2"]), int(rec["games"]),
                float(rec["mean_time1_s"]), float(rec["mean_time2_s"]),
            ))
        return ResultsTable(rows)


def emit_results(table: ResultsTable, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(table.to_csv())


def play_game(agent1, agent2, brick: int | str) -> tuple[int, GameRecord, float, float, int, int]:
    """One game; returns (outcome, record, time1, time2, moves1, moves2)."""
    b = Board.new_game(brick)
    record = GameRecord(b.brick)
    times = {1: 0.0, 2: 0.0}
    counts = {1: 0, 2: 0}
    while b.outcome == ONGOING:
        agent = agent1 if b.side == 1 else agent2
        t0 = time.perf_counter()
        try:
            move = agent.select_move(b)
        except Exception as e:
            raise AgentFailure(f"agent raised at move {b.move_count}: {e!r}") from e
        times[b.side] += time.perf_counter() - t0
        counts[b.side] += 1
        b = b.apply_move(move)  # IllegalMove here is an agent bug
        record.moves.append(move)
    record.result = b.outcome
    return b.outcome, record, times[1], times[2], counts[1], counts[2]


def _game_batch(args):
    spec1, spec2, brick, seeds, record_games = args
    out = []
    for k, s1, s2 in seeds:
        a1 = resolve_agent(spec1, s1)
        a2 = resolve_agent(spec2, s2)
        outcome, record, t1, t2, c1, c2 = play_game(a1, a2, brick)
        out.append((k, outcome, t1, t2, c1, c2, record.to_line() if record_games else None))
    return out


def play_match(cfg: MatchConfig) -> tuple[ResultRow, list[GameRecord]]:
    validate_specs([cfg.player1, cfg.player2])
    pairing = (cfg.player1, cfg.player2, cfg.brick)
    seeds = [
        (k,
         derive_seed(cfg.base_seed, pairing, k, "p1"),
         derive_seed(cfg.base_seed, pairing, k, "p2"))
        for k in range(cfg.games)
    ]
    if cfg.workers > 1:
        chunks = [seeds[i::cfg.workers] for i in range(cfg.workers)]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = [
                r for batch in pool.map(
                    _game_batch,
                    [(cfg.player1, cfg.player2, cfg.brick, c, cfg.record_games) for c in chunks],
                ) for r in batch
            ]
        results.sort()
    else:
        results = _game_batch((cfg.player1, cfg.player2, cfg.brick, seeds, cfg.record_games))
    wins1 = sum(1 for r in results if r[1] == O_WIN)
    t1 = sum(r[2] for r in results)
    t2 = sum(r[3] for r in results)
    n1 = sum(r[4] for r in results)
    n2 = sum(r[5] for r in results)
    row = ResultRow(cfg.player1, cfg.player2, cfg.brick, wins1, cfg.games - wins1,
                    cfg.games, t1 / max(n1, 1), t2 / max(n2, 1))
    records = [GameRecord.from_line(r[6]) for r in results if r[6]] if cfg.record_games else []
    return row, records


def round_robin(agents: list[str], brick: str = "E5", games: int = 100,
                base_seed: int = 0, include_self: bool = True, workers: int = 1) -> ResultsTable:
    """One play_match per ordered pair (self-pairings included by default)."""
    validate_specs(agents)
    table = ResultsTable()
    for p1 in agents:
        for p2 in agents:
            if p1 == p2 and not include_self:
                continue
            row, _ = play_match(MatchConfig(p1, p2, brick, games, base_seed, workers=workers))
            table.rows.append(row)
    return table


def eval_all_positions(agent: str, opponent: str, games_per_pos: int = 10,
                       base_seed: int = 0, workers: int = 1) -> tuple[ResultsTable, dict]:
    """The 49-brick sweep: games_per_pos games per starting position with
    `agent` as Player 1; returns per-position rows plus the aggregate."""
    validate_specs([agent, opponent])
    table = ResultsTable()
    for sq in range(49):
        row, _ = play_match(MatchConfig(agent, opponent, square_name(sq),
                                        games_per_pos, base_seed, workers=workers))
        table.rows.append(row)
    wins1 = sum(r.wins1 for r in table.rows)
    total = sum(r.games for r in table.rows)
    aggregate = {"wins1": wins1, "wins2": total - wins1, "games": total,
                 "win_rate1": wins1 / total}
    return table, aggregate


def bench_time_per_move(agent: str, brick: str = "D4", n_moves: int = 100,
                        base_seed: int = 0) -> dict:
    """Mean/std wall-clock seconds per select_move on the initial board."""
    validate_specs([agent])
    inst = resolve_agent(agent, derive_seed(base_seed, "bench", agent))
    b = Board.new_game(brick)
    samples = []
    for _ in range(n_moves):
        t0 = time.perf_counter()
        inst.select_move(b)
        samples.append(time.perf_counter() - t0)
    n = len(samples)
    mean = sum(samples) / n
    var = sum((s - mean) ** 2 for s in samples) / n
    return {"agent": agent, "brick": brick, "n_moves": n,
            "mean_s": mean, "std_s": var ** 0.5}


def _file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(path, command: str, config: dict, agents: list[str] = ()) -> None:
    """Run manifest: resolved config, seeds, checkpoint hashes, tool version."""
    from . import __version__
    checkpoints = {}
    for spec in agents:
        if spec.startswith("azero:"):
            ckpt = spec[len("azero:"):].rpartition(":")[0]
            try:
                checkpoints[ckpt] = _file_sha256(ckpt)
            except OSError:
                checkpoints[ckpt] = None
    manifest = {
        "command": command,
        "version": __version__,
        "kernel_lane": _kernels.LANE,
        "config": config,
        "checkpoints": checkpoints,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
