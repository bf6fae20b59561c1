"""Kernel lane selection.

The hot inner loops (window evaluation, incremental win checks, random
rollouts, UCB child selection) exist twice: a Cython extension (`_core`) and a pure-Python twin
(`pure`) with identical semantics.  The compiled lane is used when the
extension imports; set BTTT_KERNELS=pure|compiled to force a lane.
"""
from __future__ import annotations

import os

from .. import tables


def _load():
    want = os.environ.get("BTTT_KERNELS", "auto")
    if want not in ("auto", "pure", "compiled"):
        raise ValueError(f"BTTT_KERNELS must be auto|pure|compiled, got {want!r}")
    if want != "pure":
        try:
            from . import _core
            _core.set_tables(
                tables.WINDOWS_FLAT,
                tables.CODE_VALUES,
                tables.WINDOWS_AT_OFFSETS,
                tables.WINDOWS_AT_FLAT,
            )
            return _core
        except ImportError:
            if want == "compiled":
                raise
    from . import pure
    return pure


_impl = _load()

LANE: str = _impl.LANE
evaluate = _impl.evaluate
wins_at = _impl.wins_at
rollout = _impl.rollout
uct_argmax = _impl.uct_argmax
