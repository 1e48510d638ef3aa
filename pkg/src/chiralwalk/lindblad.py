"""Quantum stochastic walks: Lindblad dynamics interpolated by ``omega``.

    d rho/dt = -(1 - omega) i [H, rho]
               + omega * sum_k (L_k rho L_k^+ - 1/2 {L_k^+ L_k, rho})

Two integration routes are available. ``"expm"`` exponentiates the
column-stacked superoperator and is exact up to roundoff; ``"rk45"`` runs an
embedded Runge-Kutta 4(5) scheme on the matrix equation directly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .exceptions import (
    ConfigError,
    DimensionMismatch,
    IntegrationFailure,
    InvalidDensityMatrix,
    InvalidTimes,
    TooLarge,
)
from .graph import HermitianGraph
from .unitary import ProbabilityTrace, StateVector

__all__ = [
    "KINDS",
    "DensityMatrix",
    "LindbladSet",
    "QSWResult",
    "standard_lindblads",
    "lindblad_rhs",
    "build_superoperator",
    "qsw_evolve",
    "check_density",
]

KINDS = ("scattering", "dephasing", "dissipation")

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
PSD_TOL = 1e-8
EXPM_MAX_N = 16
SUPEROP_MAX_N = 64


def check_density(rho: np.ndarray, where: str = "", error=InvalidDensityMatrix) -> float:
    """Validate a density matrix and return its smallest eigenvalue.

    Values in ``[-1e-8, 0)`` are reported, never clamped.
    """
    suffix = f" at {where}" if where else ""
    if not np.all(np.isfinite(rho)):
        raise IntegrationFailure(f"non-finite density matrix{suffix}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise error(f"density matrix is not Hermitian{suffix}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise error(f"trace is {tr.real:.12g}{suffix}")
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    if min_eig < -PSD_TOL:
        raise error(f"minimum eigenvalue {min_eig:.3g}{suffix}")
    return min_eig


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex, copy=True)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got shape {rho.shape}")
        check_density(rho)
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_state(cls, psi) -> "DensityMatrix":
        if not isinstance(psi, StateVector):
            psi = StateVector(psi)
        return cls(psi.density_matrix())

    @property
    def n(self) -> int:
        return self.rho.shape[0]

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho)).copy()


@dataclass(frozen=True, eq=False)
class LindbladSet:
    operators: tuple = ()
    omega: float = 0.0
    kind_tags: tuple = ()

    def __post_init__(self):
        ops = tuple(np.array(L, dtype=complex) for L in self.operators)
        if not 0.0 <= float(self.omega) <= 1.0:
            raise ConfigError(f"omega must lie in [0, 1], got {self.omega}")
        tags = tuple(self.kind_tags) or ("custom",) * len(ops)
        if len(tags) != len(ops):
            raise ConfigError("one kind tag per operator required")
        shapes = {L.shape for L in ops}
        if len(shapes) > 1 or any(len(s) != 2 or s[0] != s[1] for s in shapes):
            raise DimensionMismatch("jump operators must share one square shape")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "kind_tags", tags)
        object.__setattr__(self, "omega", float(self.omega))

    @classmethod
    def standard(cls, g: HermitianGraph, kinds: Iterable[str], omega: float, dissipation_toward: str = "lower"):
        pairs = standard_lindblads(g, kinds, dissipation_toward=dissipation_toward)
        return cls(tuple(L for L, _ in pairs), omega, tuple(tag for _, tag in pairs))

    def check_dimension(self, n: int) -> None:
        for L in self.operators:
            if L.shape != (n, n):
                raise DimensionMismatch(f"jump operator shape {L.shape} does not match {n} vertices")


def _parse_kinds(kinds: Iterable[str]) -> list[str]:
    if isinstance(kinds, str):
        kinds = [k for k in kinds.replace("+", ",").split(",") if k.strip()]
    kinds = [k.strip().lower() for k in kinds]
    unknown = sorted(set(kinds) - set(KINDS))
    if unknown:
        raise ConfigError(f"unknown decoherence kind(s) {unknown}; choose from {KINDS}")
    return kinds


def standard_lindblads(
    g: HermitianGraph, include: Iterable[str], dissipation_toward: str = "lower"
) -> list[tuple[np.ndarray, str]]:
    """Jump operators built from the graph.

    scattering
        ``sqrt|w_uv| |v><u|`` for every ordered pair joined by an edge.
    dephasing
        ``|i><i|`` for every vertex.
    dissipation
        ``sqrt|w_uv| |v><u|`` only where ``v`` has the lower label
        (``dissipation_toward="higher"`` flips the direction).
    """
    include = set(_parse_kinds(include))
    if dissipation_toward not in ("lower", "higher"):
        raise ConfigError(f"dissipation_toward must be 'lower' or 'higher', got {dissipation_toward!r}")
    n = g.n_vertices
    W = g.weights
    out: list[tuple[np.ndarray, str]] = []
    pairs = [(u, v) for u in range(n) for v in range(n) if W[u, v] != 0]
    if "scattering" in include:
        for u, v in pairs:
            L = np.zeros((n, n), dtype=complex)
            L[v, u] = np.sqrt(abs(W[u, v]))
            out.append((L, "scattering"))
    if "dephasing" in include:
        for i in range(n):
            L = np.zeros((n, n), dtype=complex)
            L[i, i] = 1.0
            out.append((L, "dephasing"))
    if "dissipation" in include:
        for u, v in pairs:
            if (u > v) if dissipation_toward == "lower" else (u < v):
                L = np.zeros((n, n), dtype=complex)
                L[v, u] = np.sqrt(abs(W[u, v]))
                out.append((L, "dissipation"))
    return out


def lindblad_rhs(H: np.ndarray, L: LindbladSet, rho: np.ndarray) -> np.ndarray:
    """Right-hand side evaluated with matrix products (no vectorisation)."""
    w = L.omega
    out = -1j * (1.0 - w) * (H @ rho - rho @ H)
    if w:
        for Lk in L.operators:
            Ld = Lk.conj().T
            LdL = Ld @ Lk
            out = out + w * (Lk @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL))
    return out


def build_superoperator(g: HermitianGraph, L: LindbladSet) -> np.ndarray:
    """Generator M with d vec(rho)/dt = M vec(rho), vec stacking columns.

    Uses vec(A X B) = (B^T kron A) vec(X).
    """
    n = g.n_vertices
    if n > SUPEROP_MAX_N:
        raise TooLarge(f"superoperator for n={n} exceeds the n <= {SUPEROP_MAX_N} limit")
    L.check_dimension(n)
    H = g.weights
    I = np.eye(n)
    M = -1j * (1.0 - L.omega) * (np.kron(I, H) - np.kron(H.T, I))
    if L.omega:
        for Lk in L.operators:
            LdL = Lk.conj().T @ Lk
            M = M + L.omega * (np.kron(Lk.conj(), Lk) - 0.5 * np.kron(I, LdL) - 0.5 * np.kron(LdL.T, I))
    return M


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, n: int) -> np.ndarray:
    return v.reshape(n, n, order="F")


@dataclass(frozen=True, eq=False)
class QSWResult:
    trace: ProbabilityTrace
    snapshots: np.ndarray | None = None
    min_eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0))
    method: str = "expm"

    def snapshots_to_json(self) -> str:
        """Per-time density matrices, row-major ``[re, im]`` pairs."""
        if self.snapshots is None:
            raise ConfigError("evolution was run without snapshots")
        rows = []
        for t, rho in zip(self.trace.times, self.snapshots):
            rows.append({"t": float(t), "rho": [[[z.real, z.imag] for z in row] for row in rho]})
        return json.dumps({"n": int(self.snapshots.shape[1]), "snapshots": rows})


def _evolve_expm(M: np.ndarray, rho0: np.ndarray, times: np.ndarray) -> np.ndarray:
    n = rho0.shape[0]
    v0 = _vec(rho0)
    out = np.empty((times.size, n, n), dtype=complex)
    steps = np.diff(times)
    uniform = steps.size > 0 and np.allclose(steps, steps[0], rtol=1e-9, atol=0)
    if uniform:
        start = v0 if times[0] == 0 else expm(M * times[0]) @ v0
        step = expm(M * steps[0])
        v = start
        for k in range(times.size):
            if k:
                v = step @ v
            out[k] = _unvec(v, n)
    else:
        for k, t in enumerate(times):
            out[k] = _unvec(v0 if t == 0 else expm(M * t) @ v0, n)
    return out


def _evolve_rk45(H, L: LindbladSet, rho0: np.ndarray, times: np.ndarray, rtol: float, atol: float) -> np.ndarray:
    n = rho0.shape[0]

    def rhs(_t, y):
        return _vec(lindblad_rhs(H, L, _unvec(y, n)))

    if times[-1] == 0:
        return np.repeat(rho0[None], times.size, axis=0)
    sol = solve_ivp(rhs, (0.0, float(times[-1])), _vec(rho0).astype(complex), method="RK45",
                    t_eval=times, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationFailure(f"adaptive integrator failed: {sol.message}")
    return np.stack([_unvec(sol.y[:, k], n) for k in range(times.size)])


def qsw_evolve(
    g: HermitianGraph,
    L: LindbladSet,
    rho0,
    times: Sequence[float],
    method: str = "auto",
    keep_snapshots: bool = False,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> QSWResult:
    """Evolve ``rho0`` (a density matrix or pure state) and record populations.

    ``method="auto"`` picks exact exponentiation for n <= 16 and the adaptive
    integrator above that.
    """
    n = g.n_vertices
    if isinstance(rho0, StateVector):
        rho0 = DensityMatrix.from_state(rho0)
    elif not isinstance(rho0, DensityMatrix):
        arr = np.asarray(rho0)
        rho0 = DensityMatrix.from_state(arr) if arr.ndim == 1 else DensityMatrix(arr)
    if rho0.n != n:
        raise DimensionMismatch(f"density matrix is {rho0.n}x{rho0.n}, graph has {n} vertices")
    L.check_dimension(n)
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size == 0 or times[0] < 0 or np.any(np.diff(times) <= 0):
        raise InvalidTimes("times must be non-empty, non-negative and strictly increasing")
    if method == "auto":
        method = "expm" if n <= EXPM_MAX_N else "rk45"
    if method == "expm":
        rhos = _evolve_expm(build_superoperator(g, L), rho0.rho, times)
    elif method == "rk45":
        rhos = _evolve_rk45(g.weights, L, rho0.rho, times, rtol, atol)
    else:
        raise ConfigError(f"unknown integration method {method!r}")
    min_eigs = np.array([check_density(rho, f"t={t:.6g}", IntegrationFailure) for t, rho in zip(times, rhos)])
    probs = np.real(np.einsum("kii->ki", rhos))
    trace = ProbabilityTrace(times, probs, sum_tol=TRACE_TOL)
    return QSWResult(trace, rhos if keep_snapshots else None, min_eigs, method)
