"""Brick tic-tac-toe: engine, search agents, self-play training, tournaments."""

__version__ = "0.1.0"

from ._kernels import LANE as kernel_lane  # noqa: F401
