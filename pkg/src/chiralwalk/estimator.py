"""Decoherence-strength estimation on the 3-vertex zero-transfer probe.

Without decoherence the probe never populates vertex 2. With decoherence
strength ``omega`` the vertex-2 population at a fixed time grows, so a
measured hit frequency can be read back through a precomputed reference curve.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import norm
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .chiral import ChiralPhaseAssignment, apply_phases
from .exceptions import ConfigError, DegenerateTrials, NonMonotoneRange, NonMonotoneTable
from .graph import HermitianGraph, path_graph
from .lindblad import LindbladSet, _parse_kinds, qsw_evolve
from .unitary import StateVector, uniform_state

__all__ = [
    "DEFAULT_KINDS",
    "DEFAULT_T_STAR",
    "default_omega_grid",
    "ReferenceTable",
    "OmegaEstimate",
    "build_probe",
    "probe_probability",
    "build_reference",
    "wilson_interval",
    "estimate_omega",
    "simulate_hits",
    "OmegaEstimator",
]

DEFAULT_T_STAR = 3.0
# Full set (with dissipation) peaks near omega=0.4 at t*=3 and cannot be inverted on [0, 1].
DEFAULT_KINDS = ("scattering", "dephasing")
PROBE_TARGET = 2


def default_omega_grid(step: float = 0.05) -> np.ndarray:
    return np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)


def build_probe() -> tuple[HermitianGraph, StateVector]:
    """Path 1-2-3 with phase pi on (1,2), started in (|1> + |3>)/sqrt(2)."""
    g = apply_phases(path_graph(3), ChiralPhaseAssignment({(1, 2): math.pi}))
    return g, uniform_state(3, [1, 3])


def probe_probability(omega: float, t_star: float = DEFAULT_T_STAR, kinds: Iterable[str] = DEFAULT_KINDS) -> float:
    """Vertex-2 population of the probe at ``t_star`` under decoherence ``omega``."""
    g, psi0 = build_probe()
    L = LindbladSet.standard(g, kinds, omega)
    res = qsw_evolve(g, L, psi0, [t_star])
    return float(res.trace.probs[0, PROBE_TARGET - 1])


@dataclass(frozen=True, eq=False)
class ReferenceTable:
    omega_grid: np.ndarray
    measure_time: float
    probs: np.ndarray
    kinds: tuple[str, ...] = DEFAULT_KINDS
    probe_fingerprint: str = ""
    monotone_stop: int = field(default=-1)

    def __post_init__(self):
        grid = np.array(self.omega_grid, dtype=float).reshape(-1)
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if grid.size != probs.size or grid.size < 2:
            raise ConfigError("reference grid and probabilities must have the same length (>= 2)")
        if np.any(np.diff(grid) <= 0) or grid[0] < 0 or grid[-1] > 1:
            raise ConfigError("omega grid must be strictly increasing inside [0, 1]")
        if grid[0] == 0 and probs[0] >= 1e-10:
            raise ConfigError(f"reference value at omega=0 is {probs[0]:.3g}; the probe should not populate vertex 2")
        grid.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "omega_grid", grid)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "kinds", tuple(self.kinds))
        if self.monotone_stop < 0:
            object.__setattr__(self, "monotone_stop", _monotone_prefix(probs))

    @property
    def monotone_range(self) -> tuple[float, float]:
        """Omega interval on which the curve was verified strictly increasing."""
        return float(self.omega_grid[0]), float(self.omega_grid[self.monotone_stop - 1])

    @property
    def is_invertible(self) -> bool:
        return self.monotone_stop >= 2

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# t_star={self.measure_time!r}\n")
        buf.write(f"# kinds={','.join(self.kinds)}\n")
        buf.write(f"# probe={self.probe_fingerprint}\n")
        lo, hi = self.monotone_range
        buf.write(f"# monotone_range={lo!r},{hi!r}\n")
        buf.write("omega,p2\n")
        for w, p in zip(self.omega_grid, self.probs):
            buf.write(f"{w:.17g},{p:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ReferenceTable":
        meta = {}
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value.strip()
            elif line.startswith("omega"):
                continue
            else:
                w, p = line.split(",")
                rows.append((float(w), float(p)))
        if "t_star" not in meta:
            raise ConfigError("reference table lacks the t_star header")
        data = np.array(rows)
        kinds = tuple(k for k in meta.get("kinds", "").split(",") if k)
        return cls(
            omega_grid=data[:, 0],
            measure_time=float(meta["t_star"]),
            probs=data[:, 1],
            kinds=kinds,
            probe_fingerprint=meta.get("probe", ""),
        )


def _monotone_prefix(probs: np.ndarray) -> int:
    """Length of the leading strictly increasing run."""
    stop = 1
    while stop < probs.size and probs[stop] > probs[stop - 1]:
        stop += 1
    return stop


@dataclass(frozen=True)
class OmegaEstimate:
    omega_hat: float
    confidence_interval: tuple[float, float]
    sample_size: int
    p_hat: float = 0.0
    out_of_range: bool = False
    confidence: float = 0.95

    def __post_init__(self):
        lo, hi = self.confidence_interval
        if not lo <= self.omega_hat <= hi:
            raise ConfigError("estimate must lie inside its confidence interval")

    def to_dict(self) -> dict:
        return {
            "omega_hat": self.omega_hat,
            "ci_low": self.confidence_interval[0],
            "ci_high": self.confidence_interval[1],
            "confidence": self.confidence,
            "p_hat": self.p_hat,
            "sample_size": self.sample_size,
            "out_of_range": self.out_of_range,
        }


def build_reference(
    omega_grid: Sequence[float] | None = None,
    t_star: float = DEFAULT_T_STAR,
    L_kinds: Iterable[str] = DEFAULT_KINDS,
) -> ReferenceTable:
    """Tabulate P(vertex 2, t_star; omega) over the grid.

    Raises ``NonMonotoneRange`` if the curve is not increasing even between
    the first two grid points.
    """
    grid = default_omega_grid() if omega_grid is None else np.asarray(omega_grid, dtype=float)
    if grid.size < 2 or grid[0] != 0 or np.any(np.diff(grid) <= 0) or grid[-1] > 1:
        raise ConfigError("omega grid must start at 0, increase strictly and stay inside [0, 1]")
    if not t_star > 0:
        raise ConfigError(f"t_star must be positive, got {t_star}")
    kinds = tuple(_parse_kinds(L_kinds))
    g, _ = build_probe()
    probs = np.array([probe_probability(w, t_star, kinds) for w in grid])
    table = ReferenceTable(grid, float(t_star), probs, kinds, g.fingerprint())
    if not table.is_invertible:
        raise NonMonotoneRange(f"P2 is not increasing in omega at t*={t_star} for kinds {kinds}")
    return table


def wilson_interval(hits: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials < 1:
        raise DegenerateTrials("need at least one trial")
    z = norm.ppf(0.5 + confidence / 2)
    p = hits / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _invert(table: ReferenceTable, p: float) -> tuple[float, bool]:
    stop = table.monotone_stop
    xp = table.probs[:stop]
    fp = table.omega_grid[:stop]
    if p < xp[0]:
        return float(fp[0]), True
    if p > xp[-1]:
        return float(fp[-1]), True
    return float(np.interp(p, xp, fp)), False


def estimate_omega(table: ReferenceTable, observed_hits: int, trials: int, confidence: float = 0.95) -> OmegaEstimate:
    """Read ``omega`` off the reference curve from ``observed_hits / trials``."""
    if trials < 1:
        raise DegenerateTrials("need at least one trial")
    if not 0 <= observed_hits <= trials:
        raise ConfigError(f"hits must lie in 0..{trials}, got {observed_hits}")
    if not table.is_invertible:
        raise NonMonotoneTable("reference table has no verified monotone range")
    p_hat = observed_hits / trials
    omega_hat, flagged = _invert(table, p_hat)
    lo_p, hi_p = wilson_interval(observed_hits, trials, confidence)
    lo, _ = _invert(table, lo_p)
    hi, _ = _invert(table, hi_p)
    return OmegaEstimate(omega_hat, (min(lo, omega_hat), max(hi, omega_hat)), trials, p_hat, flagged, confidence)


def simulate_hits(p: float, trials: int, seed: int) -> np.ndarray:
    """Synthetic 0/1 vertex-2 detections with success probability ``p``."""
    rng = np.random.default_rng(seed)
    return (rng.random(trials) < p).astype(np.int8)


class OmegaEstimator(BaseEstimator):
    """Scikit-learn style wrapper around the reference-curve inversion.

    ``fit`` tabulates the probe curve; ``predict`` maps observed vertex-2
    frequencies to decoherence strengths.

    Examples
    --------
    >>> est = OmegaEstimator(t_star=3.0).fit()
    >>> est.predict([0.0])
    array([0.])
    """

    def __init__(self, t_star=DEFAULT_T_STAR, kinds=DEFAULT_KINDS, omega_step=0.05, confidence=0.95):
        self.t_star = t_star
        self.kinds = kinds
        self.omega_step = omega_step
        self.confidence = confidence

    def fit(self, X=None, y=None):
        self.reference_table_ = build_reference(default_omega_grid(self.omega_step), self.t_star, self.kinds)
        self.monotone_range_ = self.reference_table_.monotone_range
        return self

    def predict(self, X):
        """``X``: observed vertex-2 frequencies, shape ``(n,)`` or ``(n, 1)``."""
        check_is_fitted(self, "reference_table_")
        p = np.asarray(X, dtype=float).reshape(-1)
        if np.any((p < 0) | (p > 1)) or not np.all(np.isfinite(p)):
            raise ConfigError("frequencies must lie in [0, 1]")
        return np.array([_invert(self.reference_table_, v)[0] for v in p])

    def estimate(self, hits: int, trials: int) -> OmegaEstimate:
        check_is_fitted(self, "reference_table_")
        return estimate_omega(self.reference_table_, hits, trials, self.confidence)

    def estimate_samples(self, samples) -> OmegaEstimate:
        """Estimate from a sequence of 0/1 detections."""
        s = np.asarray(samples).reshape(-1)
        if s.size and not np.all((s == 0) | (s == 1)):
            raise ConfigError("samples must be 0 or 1")
        return self.estimate(int(s.sum()), int(s.size))
