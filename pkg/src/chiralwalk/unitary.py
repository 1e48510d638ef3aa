"""Closed-system propagation, U(t) = exp(-iHt) with H the weight matrix."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import (
    ConvergenceDomain,
    DecompositionFailure,
    DimensionMismatch,
    InvalidTimes,
    NotNormalized,
)
from .graph import HermitianGraph

__all__ = [
    "StateVector",
    "SpectralPropagator",
    "ProbabilityTrace",
    "basis_state",
    "uniform_state",
    "build_propagator",
    "evolve",
    "propagator_matrix",
    "trace_probabilities",
    "check_trs",
    "taylor_oracle",
    "time_grid",
]


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state on the vertex basis; unit norm within ``1e-12``."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex, copy=True).reshape(-1)
        if amps.size == 0:
            raise DimensionMismatch("state vector is empty")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > 1e-12:
            raise NotNormalized(f"state norm^2 is {norm!r}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def unchecked(cls, amplitudes) -> "StateVector":
        """Wrap amplitudes without the norm check (series oracle output)."""
        obj = object.__new__(cls)
        amps = np.array(amplitudes, dtype=complex, copy=True).reshape(-1)
        amps.setflags(write=False)
        object.__setattr__(obj, "amplitudes", amps)
        return obj

    @property
    def n(self) -> int:
        return self.amplitudes.size

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def __len__(self):
        return self.amplitudes.size

    def __repr__(self):
        return f"StateVector(n={self.n})"


def basis_state(n: int, k: int) -> StateVector:
    """``|k>`` with 1-based ``k``."""
    if not 1 <= k <= n:
        raise DimensionMismatch(f"basis index {k} outside 1..{n}")
    amps = np.zeros(n, dtype=complex)
    amps[k - 1] = 1.0
    return StateVector(amps)


def uniform_state(n: int, vertices: Sequence[int]) -> StateVector:
    """Equal-weight superposition over the given 1-based vertices."""
    vertices = list(dict.fromkeys(int(v) for v in vertices))
    if not vertices:
        raise DimensionMismatch("uniform state needs at least one vertex")
    amps = np.zeros(n, dtype=complex)
    for v in vertices:
        if not 1 <= v <= n:
            raise DimensionMismatch(f"vertex {v} outside 1..{n}")
        amps[v - 1] = 1.0
    return StateVector(amps / math.sqrt(len(vertices)))


@dataclass(frozen=True, eq=False)
class SpectralPropagator:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    fingerprint: str

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def hamiltonian(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


@dataclass(frozen=True, eq=False)
class ProbabilityTrace:
    """Occupation probabilities, one row per time point and one column per vertex."""

    times: np.ndarray
    probs: np.ndarray
    sum_tol: float = 1e-8

    def __post_init__(self):
        times = np.array(self.times, dtype=float).reshape(-1)
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 2 or probs.shape[0] != times.size:
            raise DimensionMismatch(f"probs shape {probs.shape} does not match {times.size} times")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise InvalidTimes("times must be strictly increasing")
        if np.any(np.abs(probs.sum(axis=1) - 1.0) > self.sum_tol):
            raise NotNormalized("a row of the probability trace does not sum to 1")
        times.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "probs", probs)

    @property
    def n_vertices(self) -> int:
        return self.probs.shape[1]

    def vertex(self, v: int) -> np.ndarray:
        """Probability column for 1-based vertex ``v``."""
        return self.probs[:, v - 1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        header = ["t"] + [f"v{j}" for j in range(1, self.n_vertices + 1)]
        buf.write(",".join(header) + "\n")
        for t, row in zip(self.times, self.probs):
            buf.write(",".join(format(x, ".17g") for x in (t, *row)) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, sum_tol: float = 1e-8) -> "ProbabilityTrace":
        data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1:], sum_tol=sum_tol)


def time_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive grid ``start, start+step, ..., stop`` without arange drift."""
    if not (step > 0 and stop > start):
        raise InvalidTimes(f"need start < stop and step > 0, got {start}:{stop}:{step}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _as_state(psi, n: int) -> StateVector:
    if not isinstance(psi, StateVector):
        psi = StateVector(psi)
    if psi.n != n:
        raise DimensionMismatch(f"state has dimension {psi.n}, graph has {n} vertices")
    return psi


def build_propagator(g: HermitianGraph) -> SpectralPropagator:
    """Eigendecomposition H = V diag(lambda) V^dagger.

    Eigenvalues ascend; each eigenvector is rotated so that its largest-modulus
    component is real and positive.
    """
    try:
        lam, V = np.linalg.eigh(g.weights)
    except np.linalg.LinAlgError as exc:
        raise DecompositionFailure(str(exc)) from exc
    if not np.all(np.isfinite(lam)):
        raise DecompositionFailure("non-finite eigenvalues")
    idx = np.argmax(np.abs(V), axis=0)
    pivot = V[idx, np.arange(V.shape[1])]
    V = V * (np.abs(pivot) / pivot)
    V[idx, np.arange(V.shape[1])] = np.abs(pivot)
    lam.setflags(write=False)
    V.setflags(write=False)
    return SpectralPropagator(lam, V, g.fingerprint())


def propagator_matrix(p: SpectralPropagator, t: float) -> np.ndarray:
    V = p.eigenvectors
    return (V * np.exp(-1j * p.eigenvalues * t)) @ V.conj().T


def evolve(p: SpectralPropagator, psi0, t: float) -> StateVector:
    psi0 = _as_state(psi0, p.n)
    if not math.isfinite(t):
        raise InvalidTimes(f"time must be finite, got {t}")
    if t == 0:
        return psi0
    V = p.eigenvectors
    coeff = V.conj().T @ psi0.amplitudes
    return StateVector(V @ (np.exp(-1j * p.eigenvalues * t) * coeff))


def trace_probabilities(p: SpectralPropagator, psi0, times) -> ProbabilityTrace:
    psi0 = _as_state(psi0, p.n)
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size == 0:
        raise InvalidTimes("time grid is empty")
    if times.size > 1 and np.any(np.diff(times) <= 0):
        raise InvalidTimes("times must be strictly increasing")
    V = p.eigenvectors
    coeff = V.conj().T @ psi0.amplitudes
    # row k: V @ (exp(-i lambda t_k) * coeff), computed independently per time
    phases = np.exp(-1j * np.outer(times, p.eigenvalues))
    amps = (phases * coeff) @ V.T
    amps[times == 0] = psi0.amplitudes
    return ProbabilityTrace(times, np.abs(amps) ** 2, sum_tol=1e-10)


def check_trs(p: SpectralPropagator, times, tol: float = 1e-10) -> tuple[bool, float]:
    """Largest ``| |U_ji|^2 - |U_ij|^2 |`` over the sampled times."""
    worst = 0.0
    for t in np.atleast_1d(np.asarray(times, dtype=float)):
        P = np.abs(propagator_matrix(p, t)) ** 2
        worst = max(worst, float(np.max(np.abs(P - P.T))))
    return worst <= tol, worst


def taylor_oracle(g: HermitianGraph, psi0, t: float, terms: int = 80) -> StateVector:
    """Truncated series sum_k (-iAt)^k / k! applied to ``psi0``.

    Test-only reference. The result is not renormalised.
    """
    psi0 = _as_state(psi0, g.n_vertices)
    if terms < 50:
        raise ConvergenceDomain(f"need at least 50 series terms, got {terms}")
    scale = abs(t) * float(np.max(np.abs(g.weights))) * g.n_vertices
    if scale >= 30:
        raise ConvergenceDomain(f"|t| * max|w| * n = {scale:.3g} is outside the series domain (< 30)")
    A = g.weights
    term = psi0.amplitudes.copy()
    total = term.copy()
    for k in range(1, terms + 1):
        term = (-1j * t / k) * (A @ term)
        total += term
    return StateVector.unchecked(total)
