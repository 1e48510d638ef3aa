import math

import numpy as np
import pytest

from chiralwalk import (
    ChiralPhaseAssignment,
    GraphFamilyParams,
    apply_phases,
    basis_state,
    build_probe,
    complete_graph,
    merged_star_type1,
    merged_star_type2,
    passive_edge_graph,
    path_graph,
    uniform_state,
)

PI = math.pi

_ACCEPTANCE = []


def record(criterion, passed, detail=""):
    _ACCEPTANCE.append((criterion, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}  {detail}")


def star_fixture():
    g, d = merged_star_type1(GraphFamilyParams(4, 3))
    a = ChiralPhaseAssignment({(1, 2): PI / 2, (3, 4): PI, (5, 6): 3 * PI / 2})
    return apply_phases(g, a), d, uniform_state(9, [1, 3, 5, 7])


def c4_fixture():
    g, d = merged_star_type2(GraphFamilyParams(2, 3))
    return apply_phases(g, ChiralPhaseAssignment({(1, 2): PI})), d, basis_state(4, 1)


def passive_fixture():
    g, d = passive_edge_graph()
    return apply_phases(g, ChiralPhaseAssignment({(1, 3): PI})), d, uniform_state(6, [1, 2])


def fixture_graphs():
    """Every named graph used across the suite, phased where the examples phase them."""
    probe, _ = build_probe()
    k3 = apply_phases(complete_graph(3), ChiralPhaseAssignment({(1, 2): PI / 2}))
    return {
        "path5": path_graph(5),
        "c4_plain": merged_star_type2(GraphFamilyParams(2, 3))[0],
        "c4": c4_fixture()[0],
        "star": star_fixture()[0],
        "passive": passive_fixture()[0],
        "probe": probe,
        "k3_chiral": k3,
        "theta": merged_star_type2(GraphFamilyParams(3, 3))[0],
    }


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_hermitian(rng, n):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (m + m.conj().T) / 2
    np.fill_diagonal(h, 0)
    return h
