"""Self-play agent: network-guided PUCT search, data generation, training.

Search follows the standard prior-weighted UCT rule
Q + c_puct * P * sqrt(N_parent) / (1 + N_child) with a negamax sign flip per
ply; terminal leaves are scored exactly (+/-1) rather than by the network.
Training runs generation-then-update iterations: self-play until the
per-iteration memory holds >= memory_target examples (each ply stored in all
4 reflections), then minibatch SGD on that memory; the updated network
immediately becomes the self-play network.
"""
from __future__ import annotations

import json
import math
import os
import re
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .board import (
    Board, GameRecord, NoLegalMove, ONGOING, O_WIN, O, Transform, parse_square,
)
from .nn import Network, NetworkConfig, SgdMomentum, checkpoint, loss_and_grads
from .rng import derive_seed
from .tables import EMPTY, N_SQUARES


@dataclass
class AzSearchConfig:
    simulations: int = 100
    c_puct: float = 1.0
    dirichlet_alpha: float = 0.2
    dirichlet_epsilon: float = 0.25
    temperature_moves: int = 10
    noise_enabled: bool = False  # training only; off at test time


@dataclass
class TrainingExample:
    planes: np.ndarray  # (3,7,7) float32
    pi: np.ndarray      # (49,) float32, supported on legal squares
    z: float            # outcome from this ply's mover perspective


class PuctNode:
    __slots__ = ("state", "priors", "n", "w", "children")

    def __init__(self, state: Board, priors: dict[int, float]):
        self.state = state
        self.priors = priors
        self.n: dict[int, int] = {a: 0 for a in priors}
        self.w: dict[int, float] = {a: 0.0 for a in priors}
        self.children: dict[int, "PuctNode"] = {}


def _terminal_value(b: Board) -> float:
    """Exact score of a decided board from the side-to-move perspective."""
    winner = O if b.outcome == O_WIN else 3 - O
    return 1.0 if winner == b.side else -1.0


def legal_mask(b: Board) -> np.ndarray:
    return np.frombuffer(b.cells, dtype=np.uint8) == EMPTY


def _expand(b: Board, net: Network) -> tuple[PuctNode, float]:
    p, v = net.predict(b.to_planes(), legal_mask(b))
    priors = {a: float(p[a]) for a in b.legal_moves()}
    return PuctNode(b, priors), v


def _select(node: PuctNode, c_puct: float) -> int:
    sqrt_total = math.sqrt(sum(node.n.values()))
    best_a, best_score = -1, -math.inf
    for a in node.priors:
        na = node.n[a]
        q = node.w[a] / na if na else 0.0
        score = q + c_puct * node.priors[a] * sqrt_total / (1 + na)
        if score > best_score:
            best_a, best_score = a, score
    return best_a


def puct_search(b: Board, net: Network, cfg: AzSearchConfig, rng: np.random.Generator) -> np.ndarray:
    """Visit distribution over the 49 squares after cfg.simulations sims."""
    if b.outcome != ONGOING:
        raise NoLegalMove("puct_search on a decided board")
    root, _ = _expand(b, net)
    if cfg.noise_enabled:
        moves = list(root.priors)
        noise = rng.dirichlet([cfg.dirichlet_alpha] * len(moves))
        for a, eta in zip(moves, noise):
            root.priors[a] = (1 - cfg.dirichlet_epsilon) * root.priors[a] + cfg.dirichlet_epsilon * float(eta)
    for _ in range(cfg.simulations):
        node = root
        path: list[tuple[PuctNode, int]] = []
        while True:
            if node.state.outcome != ONGOING:
                value = _terminal_value(node.state)
                break
            a = _select(node, cfg.c_puct)
            path.append((node, a))
            child = node.children.get(a)
            if child is None:
                next_state = node.state.apply_move(a)
                if next_state.outcome != ONGOING:
                    child = PuctNode(next_state, {})
                    value = _terminal_value(next_state)
                else:
                    child, value = _expand(next_state, net)
                node.children[a] = child
                break
            node = child
        for parent, a in reversed(path):
            value = -value
            parent.n[a] += 1
            parent.w[a] += value
    pi = np.zeros(N_SQUARES, dtype=np.float32)
    for a, count in root.n.items():
        pi[a] = count
    total = pi.sum()
    if total > 0:
        pi /= total
    return pi


def az_select_move(b: Board, net: Network, cfg: AzSearchConfig, move_number: int,
                   rng: np.random.Generator) -> int:
    """Move choice: raw-policy argmax when simulations == 0 (the no-search
    agent); otherwise sample from the visit distribution for the first
    temperature_moves plies, then take the most-visited move."""
    if b.outcome != ONGOING:
        raise NoLegalMove("az_select_move on a decided board")
    if cfg.simulations == 0:
        p, _ = net.predict(b.to_planes(), legal_mask(b))
        return int(np.argmax(p))
    pi = puct_search(b, net, cfg, rng)
    if move_number < cfg.temperature_moves:
        return int(rng.choice(N_SQUARES, p=pi / pi.sum()))
    return int(np.argmax(pi))


REFLECTIONS = (Transform.IDENTITY, Transform.FLIP_H, Transform.FLIP_V, Transform.ROT180)


def self_play_game(net: Network, cfg: AzSearchConfig, brick: int,
                   rng: np.random.Generator) -> tuple[list[TrainingExample], GameRecord]:
    """One noisy self-play game; returns per-ply examples expanded into all
    4 reflections, with z from each ply's mover perspective."""
    b = Board.new_game(brick)
    plies: list[tuple[np.ndarray, np.ndarray, int]] = []
    moves: list[int] = []
    while b.outcome == ONGOING:
        pi = puct_search(b, net, cfg, rng)
        if b.move_count < cfg.temperature_moves:
            move = int(rng.choice(N_SQUARES, p=pi / pi.sum()))
        else:
            move = int(np.argmax(pi))
        plies.append((b.to_planes(), pi, b.side))
        moves.append(move)
        b = b.apply_move(move)
    winner = O if b.outcome == O_WIN else 3 - O
    examples = []
    for planes, pi, mover in plies:
        z = 1.0 if mover == winner else -1.0
        for t in REFLECTIONS:
            examples.append(TrainingExample(t.planes(planes), t.policy(pi), z))
    record = GameRecord(brick, moves, b.outcome, meta={"agent": "azero-selfplay"})
    return examples, record


@dataclass
class IterationConfig:
    memory_target: int = 6000
    batch_size: int = 256
    brick_pool: tuple[str, ...] = ("D4",)
    updates_per_iteration: int | None = None

    def n_updates(self) -> int:
        if self.updates_per_iteration is not None:
            return self.updates_per_iteration
        return math.ceil(2 * self.memory_target / self.batch_size)


def draw_brick(brick_pool, rng: np.random.Generator) -> int:
    """Uniform draw from the training brick pool."""
    bricks = [b if isinstance(b, int) else parse_square(b) for b in brick_pool]
    return bricks[rng.integers(len(bricks))]


def run_iteration(net: Network, opt: SgdMomentum, it_cfg: IterationConfig,
                  search_cfg: AzSearchConfig, rng: np.random.Generator,
                  reg_c: float = 1e-4) -> dict:
    """One generation-then-train cycle; returns metrics."""
    memory: list[TrainingExample] = []
    games = 0
    lengths = []
    t0 = time.perf_counter()
    while len(memory) < it_cfg.memory_target:
        brick = draw_brick(it_cfg.brick_pool, rng)
        examples, record = self_play_game(net, search_cfg, brick, rng)
        memory.extend(examples)
        games += 1
        lengths.append(len(record.moves))
    gen_time = time.perf_counter() - t0
    planes = np.stack([ex.planes for ex in memory])
    pis = np.stack([ex.pi for ex in memory])
    zs = np.array([ex.z for ex in memory], dtype=planes.dtype)
    masks = planes.sum(axis=1).reshape(len(memory), N_SQUARES) == 0
    t0 = time.perf_counter()
    losses = []
    for _ in range(it_cfg.n_updates()):
        idx = rng.choice(len(memory), size=min(it_cfg.batch_size, len(memory)), replace=False)
        metrics, grads = loss_and_grads(net, planes[idx], pis[idx], zs[idx], masks[idx], reg_c)
        opt.step(net.params(), grads)
        losses.append(metrics)
    train_time = time.perf_counter() - t0
    mean = lambda key: float(np.mean([m[key] for m in losses]))
    return {
        "games": games,
        "examples": len(memory),
        "mean_game_length": float(np.mean(lengths)),
        "updates": len(losses),
        "loss": mean("loss"),
        "value_loss": mean("value_loss"),
        "policy_loss": mean("policy_loss"),
        "reg_loss": mean("reg_loss"),
        "gen_seconds": gen_time,
        "train_seconds": train_time,
    }


@dataclass
class TrainConfig:
    brick_pool: tuple[str, ...] = ("D4",)
    total_iterations: int = 40
    memory_target: int = 6000
    batch_size: int = 256
    updates_per_iteration: int | None = None
    simulations: int = 100
    c_puct: float = 1.0
    dirichlet_alpha: float = 0.2
    dirichlet_epsilon: float = 0.25
    temperature_moves: int = 10
    filters: int = 24
    residual_blocks: int = 2
    lr: float = 0.1
    momentum: float = 0.9
    reg_c: float = 0.0001
    seed: int = 0
    out_dir: str = "runs/azero"

    def network_config(self) -> NetworkConfig:
        return NetworkConfig(filters=self.filters, residual_blocks=self.residual_blocks)

    def search_config(self) -> AzSearchConfig:
        return AzSearchConfig(
            simulations=self.simulations, c_puct=self.c_puct,
            dirichlet_alpha=self.dirichlet_alpha, dirichlet_epsilon=self.dirichlet_epsilon,
            temperature_moves=self.temperature_moves, noise_enabled=True,
        )

    def iteration_config(self) -> IterationConfig:
        return IterationConfig(
            memory_target=self.memory_target, batch_size=self.batch_size,
            brick_pool=self.brick_pool, updates_per_iteration=self.updates_per_iteration,
        )


_CKPT_RE = re.compile(r"iter_(\d+)\.ckpt$")


def _save_net(path, cfg: TrainConfig, net: Network, opt: SgdMomentum, iteration: int) -> None:
    arrays = dict(net.state_arrays())
    for name, vel in opt.velocity.items():
        arrays["opt." + name] = vel
    config = {"network": asdict(net.config), "train": asdict(cfg), "iteration": iteration}
    checkpoint.save(path, config, arrays)


def load_network(path) -> tuple[Network, dict]:
    """Loads a training checkpoint into an eval-ready Network."""
    config, arrays = checkpoint.load(path)
    net = Network(NetworkConfig(**config["network"]))
    net.load_arrays({k: v for k, v in arrays.items() if not k.startswith("opt.")})
    return net, config


def train(cfg: TrainConfig, log=print) -> str:
    """Runs (or resumes) the full training schedule; returns the final
    checkpoint path.  Per-iteration RNG streams are derived from (seed,
    iteration), so a resumed run continues identically."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    net = Network(cfg.network_config(), seed=cfg.seed)
    opt = SgdMomentum(cfg.lr, cfg.momentum)
    start = 0
    done = sorted(
        (int(m.group(1)), f) for f in os.listdir(cfg.out_dir)
        if (m := _CKPT_RE.search(f))
    )
    if done:
        last_it, last_file = done[-1]
        config, arrays = checkpoint.load(os.path.join(cfg.out_dir, last_file))
        net.load_arrays({k: v for k, v in arrays.items() if not k.startswith("opt.")})
        params = net.params()
        for k, v in arrays.items():
            if k.startswith("opt."):
                opt.velocity[k[4:]] = v.astype(params[k[4:]].dtype)
        start = last_it + 1
        log(f"resuming from iteration {last_it}")
    metrics_path = os.path.join(cfg.out_dir, "metrics.jsonl")
    final_path = os.path.join(cfg.out_dir, "final.ckpt")
    for it in range(start, cfg.total_iterations):
        rng = np.random.default_rng(derive_seed(cfg.seed, "iteration", it))
        metrics = run_iteration(net, opt, cfg.iteration_config(), cfg.search_config(), rng, cfg.reg_c)
        metrics["iteration"] = it
        with open(metrics_path, "a") as f:
            f.write(json.dumps(metrics) + "\n")
        _save_net(os.path.join(cfg.out_dir, f"iter_{it:03d}.ckpt"), cfg, net, opt, it)
        _save_net(final_path, cfg, net, opt, it)
        log(f"iter {it}: loss={metrics['loss']:.4f} games={metrics['games']} "
            f"len={metrics['mean_game_length']:.1f} "
            f"({metrics['gen_seconds']:.0f}s gen, {metrics['train_seconds']:.0f}s train)")
    if not os.path.exists(final_path):
        _save_net(final_path, cfg, net, opt, start - 1)
    return final_path
