"""Edge phases, the branch-sum interference condition and the path gauge map."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .exceptions import ConfigError, InvalidDecomposition, PhaseOnNonEdge, SingleBranch
from .graph import BranchDecomposition, HermitianGraph

__all__ = [
    "ChiralPhaseAssignment",
    "BranchPhaseSums",
    "ZERO_TRANSFER_TOL",
    "unit_phasor",
    "apply_phases",
    "branch_phase_sums",
    "zero_transfer_residual",
    "plan_zero_transfer",
    "gauge_amplitudes",
    "parse_phase",
    "parse_phase_list",
]

TWO_PI = 2.0 * math.pi
ZERO_TRANSFER_TOL = 1e-12


def unit_phasor(alpha: float) -> complex:
    """``exp(i*alpha)``, exact for integer multiples of pi/2."""
    quarter = alpha / (math.pi / 2)
    k = round(quarter)
    if abs(quarter - k) < 1e-12:
        return (1.0 + 0j, 1j, -1.0 + 0j, -1j)[k % 4]
    return complex(math.cos(alpha), math.sin(alpha))


def _normalize(alpha: float) -> float:
    a = math.fmod(float(alpha), TWO_PI)
    if a < 0:
        a += TWO_PI
    # fmod of e.g. -1e-17 lands exactly on 2*pi after the shift
    return 0.0 if a >= TWO_PI else a


@dataclass(frozen=True)
class ChiralPhaseAssignment:
    """Phases on directed edges.

    An entry ``(i, j) -> alpha`` multiplies ``weights[i][j]`` by ``e^{i alpha}``
    and ``weights[j][i]`` by ``e^{-i alpha}``. Each undirected pair is stored
    once, and phases are reduced into ``[0, 2*pi)``.
    """

    phases: Mapping[tuple[int, int], float]

    def __post_init__(self):
        clean: dict[tuple[int, int], float] = {}
        seen: set[frozenset] = set()
        for (i, j), alpha in dict(self.phases).items():
            i, j = int(i), int(j)
            if not math.isfinite(alpha):
                raise ConfigError(f"phase on ({i},{j}) is not finite")
            key = frozenset((i, j))
            if key in seen:
                raise ConfigError(f"pair ({i},{j}) carries more than one phase")
            seen.add(key)
            clean[(i, j)] = _normalize(alpha)
        object.__setattr__(self, "phases", clean)

    @classmethod
    def empty(cls) -> "ChiralPhaseAssignment":
        return cls({})

    def signed_phase(self, i: int, j: int) -> float:
        """Phase picked up walking the directed edge ``i -> j`` (0 if unphased)."""
        if (i, j) in self.phases:
            return self.phases[(i, j)]
        if (j, i) in self.phases:
            return -self.phases[(j, i)]
        return 0.0

    def negated(self) -> "ChiralPhaseAssignment":
        return ChiralPhaseAssignment({k: -a for k, a in self.phases.items()})

    def __len__(self):
        return len(self.phases)

    def to_dict(self) -> dict:
        return {"phases": [{"i": i, "j": j, "alpha": a} for (i, j), a in self.phases.items()]}

    @classmethod
    def from_dict(cls, data) -> "ChiralPhaseAssignment":
        entries = data["phases"] if isinstance(data, dict) else data
        return cls({(int(e["i"]), int(e["j"])): float(e["alpha"]) for e in entries})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ChiralPhaseAssignment":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class BranchPhaseSums:
    sums: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "sums", tuple(float(s) for s in self.sums))

    def __len__(self):
        return len(self.sums)


def apply_phases(g: HermitianGraph, a: ChiralPhaseAssignment) -> HermitianGraph:
    w = np.array(g.weights)
    for (i, j), alpha in a.phases.items():
        if not (1 <= i <= g.n_vertices and 1 <= j <= g.n_vertices) or w[i - 1, j - 1] == 0:
            raise PhaseOnNonEdge(f"({i},{j}) is not an edge of the graph")
        w[i - 1, j - 1] = w[i - 1, j - 1] * unit_phasor(alpha)
        w[j - 1, i - 1] = np.conj(w[i - 1, j - 1])
    return HermitianGraph(w)


def branch_phase_sums(d: BranchDecomposition, a: ChiralPhaseAssignment) -> BranchPhaseSums:
    return BranchPhaseSums(
        tuple(sum(a.signed_phase(i, j) for i, j in d.branch_edges(p)) for p in range(1, d.b + 1))
    )


def zero_transfer_residual(s: BranchPhaseSums | Sequence[float]) -> float:
    """Modulus of the phasor sum over branches. Zero means the target is never reached."""
    sums = s.sums if isinstance(s, BranchPhaseSums) else tuple(s)
    if len(sums) == 1:
        # one unit phasor has modulus 1; skip the cos/sin rounding
        return 1.0
    return abs(sum((unit_phasor(-x) for x in sums), 0j))


def plan_zero_transfer(d: BranchDecomposition) -> ChiralPhaseAssignment:
    """Put the b-th roots of unity on the first edge of each branch."""
    if d.b < 2:
        raise SingleBranch("a single branch cannot cancel its own amplitude")
    phases = {}
    for p in range(1, d.b + 1):
        phases[d.branch_edges(p)[0]] = TWO_PI * (p - 1) / d.b
    return ChiralPhaseAssignment(phases)


def gauge_amplitudes(alpha_trace: Sequence[complex], a: ChiralPhaseAssignment, start_vertex: int) -> np.ndarray:
    """Map unphased path amplitudes onto the phased walk started at ``start_vertex``.

    Vertex ``j`` of the path picks up ``exp(-i * sum of phases from k to j)``
    when it lies past the start and the conjugate factor when it lies before it.
    """
    amps = np.asarray(alpha_trace, dtype=complex)
    n = amps.size
    k = int(start_vertex)
    if not 1 <= k <= n:
        raise InvalidDecomposition(f"start vertex {k} outside 1..{n}")
    for i, j in a.phases:
        if abs(i - j) != 1 or not (1 <= i <= n and 1 <= j <= n):
            raise PhaseOnNonEdge(f"({i},{j}) is not an edge of the {n}-vertex path")
    # cumulative phase from vertex 1 to vertex j
    edge = np.array([a.signed_phase(l, l + 1) for l in range(1, n)])
    cum = np.concatenate(([0.0], np.cumsum(edge)))
    out = np.exp(-1j * (cum - cum[k - 1])) * amps
    out[k - 1] = amps[k - 1]
    return out


_PHASE_RE = re.compile(
    r"^\s*(?P<sign>[-+]?)\s*(?P<num>\d+(?:\.\d*)?)?\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+))?\s*$", re.IGNORECASE
)


def parse_phase(text: str) -> float:
    """Parse ``"pi/2"``, ``"3pi/2"``, ``"-pi"``, ``"2*pi/3"`` or a plain float (radians)."""
    m = _PHASE_RE.match(text)
    if m is None:
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"cannot parse phase {text!r}") from None
    num = float(m.group("num")) if m.group("num") else 1.0
    den = int(m.group("den")) if m.group("den") else 1
    if den == 0:
        raise ConfigError(f"zero denominator in phase {text!r}")
    value = num * math.pi / den
    return -value if m.group("sign") == "-" else value


def parse_phase_list(text: str) -> ChiralPhaseAssignment:
    """Parse ``"1,2:pi; 3,4:pi/2"`` into an assignment."""
    phases = {}
    for chunk in re.split(r"[;\s]+", text.strip()):
        if not chunk:
            continue
        try:
            pair, value = chunk.split(":")
            i, j = (int(v) for v in pair.split(","))
        except ValueError:
            raise ConfigError(f"phase entry {chunk!r} is not of the form i,j:alpha") from None
        phases[(i, j)] = parse_phase(value)
    return ChiralPhaseAssignment(phases)
