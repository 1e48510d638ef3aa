"""Input coercion helpers shared by the engines, the estimator and the CLI.

Each ``check_*`` accepts the package type or a plain array/sequence and
returns the package type, raising a package exception on bad input.
"""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .exceptions import ConfigError, DimensionMismatch, InvalidTimes
from .graph import HermitianGraph
from .unitary import StateVector

__all__ = ["check_graph", "check_state", "check_times", "check_omega", "check_hits"]


def check_graph(g) -> HermitianGraph:
    if isinstance(g, HermitianGraph):
        return g
    return HermitianGraph(np.asarray(g, dtype=complex))


def check_state(psi, n: int | None = None) -> StateVector:
    if not isinstance(psi, StateVector):
        psi = StateVector(np.asarray(psi, dtype=complex))
    if n is not None and psi.n != n:
        raise DimensionMismatch(f"state has dimension {psi.n}, expected {n}")
    return psi


def check_times(times: Iterable[float], allow_negative: bool = True) -> np.ndarray:
    t = np.asarray(times, dtype=float).reshape(-1)
    if t.size == 0:
        raise InvalidTimes("time grid is empty")
    if not np.all(np.isfinite(t)):
        raise InvalidTimes("times must be finite")
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise InvalidTimes("times must be strictly increasing")
    if not allow_negative and t[0] < 0:
        raise InvalidTimes("times must be non-negative")
    return t


def check_omega(omega) -> float:
    w = float(omega)
    if not (math.isfinite(w) and 0.0 <= w <= 1.0):
        raise ConfigError(f"omega must lie in [0, 1], got {omega}")
    return w


def check_hits(hits, trials) -> tuple[int, int]:
    if int(trials) != trials or int(hits) != hits:
        raise ConfigError("hits and trials must be integers")
    return int(hits), int(trials)
