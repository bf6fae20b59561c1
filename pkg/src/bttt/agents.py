"""Agent instances and name resolution for the harness/CLI.

Spec grammar: "random", "minimax", "minimax:rand", "mcts:<iterations>",
"azero:<checkpoint-path>:<simulations>" (0 simulations = raw policy net).
Every agent is constructed with an explicit seed and exposes
select_move(board) -> square index.
"""
from __future__ import annotations

import numpy as np

from . import azero, mcts, minimax
from .board import Board
from .rng import PCG32


class UnknownAgent(ValueError):
    pass


class MissingCheckpoint(FileNotFoundError):
    pass


class RandomAgent:
    def __init__(self, seed: int = 0):
        self.rng = PCG32(seed)

    def select_move(self, b: Board) -> int:
        return self.rng.choice(b.legal_moves())


class MinimaxAgent:
    def __init__(self, seed: int = 0, tie_break: str = minimax.FIRST_INDEX, depth: int = 2):
        self.cfg = minimax.MinimaxConfig(depth=depth, tie_break=tie_break, seed=seed)

    def select_move(self, b: Board) -> int:
        return minimax.select_move(b, self.cfg)


class MctsAgent:
    def __init__(self, iterations: int, seed: int = 0, c: float = 1.0):
        self.iterations = iterations
        self.c = c
        self.rng = PCG32(seed)  # fresh sub-seed per move, fresh tree per search

    def select_move(self, b: Board) -> int:
        cfg = mcts.MctsConfig(iterations=self.iterations, c=self.c, seed=self.rng.next_u64())
        return mcts.search(b, cfg)


class AzeroAgent:
    def __init__(self, net, simulations: int, seed: int = 0,
                 search_cfg: azero.AzSearchConfig | None = None):
        self.net = net
        self.cfg = search_cfg or azero.AzSearchConfig(simulations=simulations, noise_enabled=False)
        self.cfg.simulations = simulations
        self.rng = np.random.default_rng(seed)

    def select_move(self, b: Board) -> int:
        return azero.az_select_move(b, self.net, self.cfg, b.move_count, self.rng)


_NET_CACHE: dict[str, object] = {}


def _load_net(path: str):
    if path not in _NET_CACHE:
        try:
            net, _ = azero.load_network(path)
        except FileNotFoundError:
            raise MissingCheckpoint(f"checkpoint not found: {path}") from None
        _NET_CACHE[path] = net
    return _NET_CACHE[path]


def resolve_agent(spec: str, seed: int = 0):
    """Builds an agent instance from its harness name."""
    if spec == "random":
        return RandomAgent(seed)
    if spec == "minimax":
        return MinimaxAgent(seed)
    if spec == "minimax:rand":
        return MinimaxAgent(seed, tie_break=minimax.SEEDED_RANDOM)
    if spec.startswith("mcts:"):
        try:
            iters = int(spec.split(":", 1)[1])
        except ValueError:
            raise UnknownAgent(f"bad mcts spec {spec!r}: want mcts:<iterations>") from None
        if iters < 1:
            raise UnknownAgent(f"bad mcts spec {spec!r}: iterations must be >= 1")
        return MctsAgent(iters, seed)
    if spec.startswith("azero:"):
        rest = spec[len("azero:"):]
        path, sep, sims_s = rest.rpartition(":")
        if not sep:
            raise UnknownAgent(f"bad azero spec {spec!r}: want azero:<checkpoint>:<simulations>")
        try:
            sims = int(sims_s)
        except ValueError:
            raise UnknownAgent(f"bad azero spec {spec!r}: simulations must be an integer") from None
        return AzeroAgent(_load_net(path), sims, seed)
    raise UnknownAgent(
        f"unknown agent {spec!r}: expected random | minimax | minimax:rand | "
        f"mcts:<iters> | azero:<ckpt>:<sims>"
    )


def validate_specs(specs) -> None:
    """Rejects unresolvable names (and missing checkpoints) up front."""
    for spec in specs:
        resolve_agent(spec, seed=0)
