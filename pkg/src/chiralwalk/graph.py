"""Complex-Hermitian weighted graphs and the merged-path graph families.

Vertices are labelled 1..n in every public function. Internally the weight
matrix is an ordinary 0-based numpy array.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import (
    DuplicateEdge,
    IndexOutOfRange,
    InvalidBranchIndex,
    InvalidDecomposition,
    InvalidParams,
    NotHermitian,
    SelfLoop,
)

__all__ = [
    "HermitianGraph",
    "GraphFamilyParams",
    "BranchDecomposition",
    "new_graph",
    "path_graph",
    "cycle_graph",
    "cycle_decomposition",
    "complete_graph",
    "merged_star_type1",
    "merged_star_type2",
    "passive_edge_graph",
    "spanning_branch_subgraph",
    "brute_force_isomorphic",
    "graph_from_matrix",
]


@dataclass(frozen=True, eq=False)
class HermitianGraph:
    """Dense complex adjacency matrix with exact Hermitian symmetry.

    The constructor copies ``weights`` and rejects anything that is not
    exactly Hermitian with a zero diagonal. The stored array is read-only.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=complex, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise NotHermitian(f"weights must be a non-empty square matrix, got shape {w.shape}")
        if np.any(np.diag(w) != 0):
            raise SelfLoop("diagonal of the weight matrix must be zero")
        if not np.array_equal(w, w.conj().T):
            raise NotHermitian("weights[i][j] must equal conj(weights[j][i]) exactly")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_vertices(self) -> int:
        return self.weights.shape[0]

    @property
    def hamiltonian(self) -> np.ndarray:
        """H = A' (no Laplacian, no sign flip)."""
        return self.weights

    def edges(self) -> list[tuple[int, int, complex]]:
        """Undirected edges as ``(i, j, w)`` with ``i < j``, 1-based, ``w = weights[i][j]``."""
        iu, ju = np.nonzero(np.triu(self.weights != 0, k=1))
        return [(int(i) + 1, int(j) + 1, complex(self.weights[i, j])) for i, j in zip(iu, ju)]

    def has_edge(self, i: int, j: int) -> bool:
        self._check_vertex(i)
        self._check_vertex(j)
        return bool(self.weights[i - 1, j - 1] != 0)

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(np.count_nonzero(self.weights[v - 1]))

    def is_real_symmetric(self) -> bool:
        return bool(np.all(self.weights.imag == 0))

    def fingerprint(self) -> str:
        """Short hash of the weight matrix, stable across runs."""
        data = np.ascontiguousarray(self.weights, dtype="<c16").tobytes()
        return hashlib.sha256(data).hexdigest()[:16]

    def _check_vertex(self, v: int) -> None:
        if not 1 <= v <= self.n_vertices:
            raise IndexOutOfRange(f"vertex {v} outside 1..{self.n_vertices}")

    def __eq__(self, other):
        if not isinstance(other, HermitianGraph):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.fingerprint())

    def __repr__(self):
        return f"HermitianGraph(n_vertices={self.n_vertices}, edges={len(self.edges())})"

    # -- serialisation -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n_vertices": self.n_vertices,
            "edges": [{"i": i, "j": j, "re": w.real, "im": w.imag} for i, j, w in self.edges()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HermitianGraph":
        edges = [(e["i"], e["j"], complex(e.get("re", 1.0), e.get("im", 0.0))) for e in data["edges"]]
        return new_graph(int(data["n_vertices"]), edges)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "HermitianGraph":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class GraphFamilyParams:
    b: int
    n: int

    def __post_init__(self):
        if not (isinstance(self.b, (int, np.integer)) and isinstance(self.n, (int, np.integer))):
            raise InvalidParams("b and n must be integers")
        if self.b < 1 or self.n < 2:
            raise InvalidParams(f"need b >= 1 and n >= 2, got b={self.b}, n={self.n}")

    @property
    def type1_vertices(self) -> int:
        return (self.n - 1) * self.b + 1

    @property
    def type2_vertices(self) -> int:
        return (self.n - 2) * self.b + 2


@dataclass(frozen=True)
class BranchDecomposition:
    """Edge-disjoint paths of equal length that all end at ``merge_vertex``.

    Each branch is listed in traversal order, source first, merge vertex last.
    """

    branches: tuple[tuple[int, ...], ...]
    merge_vertex: int
    source_vertices: tuple[int, ...] = field(default=())

    def __post_init__(self):
        branches = tuple(tuple(int(v) for v in br) for br in self.branches)
        object.__setattr__(self, "branches", branches)
        if not self.source_vertices:
            object.__setattr__(self, "source_vertices", tuple(br[0] for br in branches))
        else:
            object.__setattr__(self, "source_vertices", tuple(int(v) for v in self.source_vertices))
        self._check_shape()

    def _check_shape(self) -> None:
        if not self.branches:
            raise InvalidDecomposition("decomposition needs at least one branch")
        lengths = {len(br) for br in self.branches}
        if len(lengths) != 1 or min(lengths) < 2:
            raise InvalidDecomposition("branches must all have the same number (>= 2) of vertices")
        seen: set[frozenset] = set()
        for p, br in enumerate(self.branches, start=1):
            if len(set(br)) != len(br):
                raise InvalidDecomposition(f"branch {p} repeats a vertex")
            if br[-1] != self.merge_vertex:
                raise InvalidDecomposition(f"branch {p} does not end at merge vertex {self.merge_vertex}")
            if self.source_vertices[p - 1] != br[0]:
                raise InvalidDecomposition(f"source vertex of branch {p} is not its first vertex")
            for e in self.branch_edges(p):
                key = frozenset(e)
                if key in seen:
                    raise InvalidDecomposition(f"edge {e} belongs to more than one branch")
                seen.add(key)
        if len(self.source_vertices) != len(self.branches):
            raise InvalidDecomposition("one source vertex per branch required")

    @property
    def b(self) -> int:
        return len(self.branches)

    @property
    def n(self) -> int:
        return len(self.branches[0])

    def branch_edges(self, p: int) -> list[tuple[int, int]]:
        """Directed edges of branch ``p`` (1-based) in traversal order."""
        if not 1 <= p <= len(self.branches):
            raise InvalidBranchIndex(f"branch index {p} outside 1..{len(self.branches)}")
        br = self.branches[p - 1]
        return list(zip(br[:-1], br[1:]))

    def all_edges(self) -> list[tuple[int, int]]:
        return [e for p in range(1, self.b + 1) for e in self.branch_edges(p)]

    def validate_for(self, g: HermitianGraph) -> None:
        """Raise if any claimed edge is missing from ``g``."""
        for p in range(1, self.b + 1):
            for i, j in self.branch_edges(p):
                if not (1 <= i <= g.n_vertices and 1 <= j <= g.n_vertices):
                    raise InvalidDecomposition(f"branch {p} references a vertex outside the graph")
                if g.weights[i - 1, j - 1] == 0:
                    raise InvalidDecomposition(f"branch {p} uses ({i},{j}), which is not an edge")

    def initial_state_vertices(self) -> tuple[int, ...]:
        """Distinct source vertices (a single vertex when the sources are merged)."""
        return tuple(dict.fromkeys(self.source_vertices))

    def to_dict(self) -> dict:
        return {"branches": [list(br) for br in self.branches], "merge_vertex": self.merge_vertex}

    @classmethod
    def from_dict(cls, data: dict) -> "BranchDecomposition":
        return cls(tuple(tuple(br) for br in data["branches"]), int(data["merge_vertex"]))


def new_graph(n_vertices: int, edges: Iterable[tuple[int, int, complex]]) -> HermitianGraph:
    """Build a graph from 1-based ``(i, j, w)`` triples.

    ``w`` lands on ``weights[i][j]`` and ``conj(w)`` on ``weights[j][i]``.
    """
    if int(n_vertices) != n_vertices or n_vertices < 1:
        raise InvalidParams(f"n_vertices must be a positive integer, got {n_vertices}")
    n_vertices = int(n_vertices)
    w = np.zeros((n_vertices, n_vertices), dtype=complex)
    seen: set[frozenset] = set()
    for i, j, weight in edges:
        if not (1 <= i <= n_vertices and 1 <= j <= n_vertices):
            raise IndexOutOfRange(f"edge ({i},{j}) outside 1..{n_vertices}")
        if i == j:
            raise SelfLoop(f"self loop at vertex {i}")
        key = frozenset((i, j))
        if key in seen:
            raise DuplicateEdge(f"edge ({i},{j}) given twice")
        seen.add(key)
        weight = complex(weight)
        w[i - 1, j - 1] = weight
        w[j - 1, i - 1] = weight.conjugate()
    return HermitianGraph(w)


def path_graph(n: int) -> HermitianGraph:
    if n < 1:
        raise InvalidParams(f"path needs n >= 1, got {n}")
    return new_graph(n, [(k, k + 1, 1.0) for k in range(1, n)])


def cycle_graph(n: int) -> HermitianGraph:
    """Ring 1-2-...-n-1."""
    if n < 3:
        raise InvalidParams(f"cycle needs n >= 3, got {n}")
    return new_graph(n, [(k, k + 1, 1.0) for k in range(1, n)] + [(n, 1, 1.0)])


def cycle_decomposition(n: int) -> BranchDecomposition:
    """Two branches from vertex 1 to the opposite vertex of an even ring."""
    if n < 4 or n % 2:
        raise InvalidParams(f"only even cycles split into two equal branches, got n={n}")
    target = n // 2 + 1
    forward = tuple(range(1, target + 1))
    backward = (1,) + tuple(range(n, target - 1, -1))
    return BranchDecomposition((forward, backward), target)


def complete_graph(n: int) -> HermitianGraph:
    return new_graph(n, [(i, j, 1.0) for i, j in itertools.combinations(range(1, n + 1), 2)])


def merged_star_type1(params: GraphFamilyParams) -> tuple[HermitianGraph, BranchDecomposition]:
    """``b`` paths of ``n`` vertices sharing their last vertex.

    Branch p holds vertices (n-1)(p-1)+1 .. (n-1)p and every branch ends at
    N = (n-1)b + 1.
    """
    b, n = params.b, params.n
    N = params.type1_vertices
    branches = []
    for p in range(1, b + 1):
        first = (n - 1) * (p - 1) + 1
        branches.append(tuple(range(first, first + n - 1)) + (N,))
    edges = [(u, v, 1.0) for br in branches for u, v in zip(br[:-1], br[1:])]
    return new_graph(N, edges), BranchDecomposition(tuple(branches), N)


def merged_star_type2(params: GraphFamilyParams) -> tuple[HermitianGraph, BranchDecomposition]:
    """``b`` paths of ``n`` vertices sharing both end vertices.

    Vertex 1 is the shared source, vertex (n-2)b + 2 the shared target and
    branch p runs through the interior vertices (n-2)(p-1)+2 .. (n-2)p+1.
    """
    b, n = params.b, params.n
    if b < 2 or n < 3:
        raise InvalidParams(f"type-2 family needs b >= 2 and n >= 3, got b={b}, n={n}")
    N = params.type2_vertices
    branches = []
    for p in range(1, b + 1):
        first = (n - 2) * (p - 1) + 2
        branches.append((1,) + tuple(range(first, first + n - 2)) + (N,))
    edges = [(u, v, 1.0) for br in branches for u, v in zip(br[:-1], br[1:])]
    return new_graph(N, edges), BranchDecomposition(tuple(branches), N)


def passive_edge_graph() -> tuple[HermitianGraph, BranchDecomposition]:
    """Two triangles joined by the edge 3-4; branches 1-3 and 2-3 meet at vertex 3."""
    edges = [(1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0), (4, 6, 1.0), (5, 6, 1.0)]
    return new_graph(6, edges), BranchDecomposition(((1, 3), (2, 3)), 3)


def spanning_branch_subgraph(g: HermitianGraph, d: BranchDecomposition, p: int) -> HermitianGraph:
    """Keep only the edges of branch ``p``; all vertices stay."""
    edges = d.branch_edges(p)
    d.validate_for(g)
    w = np.zeros_like(g.weights)
    for i, j in edges:
        w[i - 1, j - 1] = g.weights[i - 1, j - 1]
        w[j - 1, i - 1] = g.weights[j - 1, i - 1]
    return HermitianGraph(w)


def brute_force_isomorphic(g: HermitianGraph | np.ndarray, h: HermitianGraph | np.ndarray) -> bool:
    """Exhaustive permutation search on the edge pattern. Only sensible for n <= 8."""
    a = np.asarray(g.weights if isinstance(g, HermitianGraph) else g) != 0
    c = np.asarray(h.weights if isinstance(h, HermitianGraph) else h) != 0
    if a.shape != c.shape:
        return False
    n = a.shape[0]
    if n > 8:
        raise InvalidParams("brute-force isomorphism search is limited to n <= 8")
    if sorted(a.sum(0)) != sorted(c.sum(0)):
        return False
    for perm in itertools.permutations(range(n)):
        idx = np.array(perm)
        if np.array_equal(a[np.ix_(idx, idx)], c):
            return True
    return False


def graph_from_matrix(matrix: Sequence[Sequence[complex]]) -> HermitianGraph:
    return HermitianGraph(np.asarray(matrix, dtype=complex))
