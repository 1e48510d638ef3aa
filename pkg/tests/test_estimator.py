import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from chiralwalk.estimator import (
    DEFAULT_KINDS,
    OmegaEstimate,
    OmegaEstimator,
    ReferenceTable,
    build_probe,
    build_reference,
    default_omega_grid,
    estimate_omega,
    probe_probability,
    simulate_hits,
    wilson_interval,
)
from chiralwalk.exceptions import ConfigError, DegenerateTrials, NonMonotoneRange, NonMonotoneTable
from chiralwalk.unitary import build_propagator, time_grid, trace_probabilities

FULL = ("scattering", "dephasing", "dissipation")

# P(vertex 2, t*=3) with all three operator kinds, from an independent
# kron-vectorised expm computation on omega = 0, 0.05, ..., 1.
FULL_T3 = [
    0.0, 0.126014745115, 0.204094864252, 0.251248592418, 0.27909790269,
    0.295057110449, 0.303636383089, 0.307534520277, 0.308407880058, 0.307340687856,
    0.305097924494, 0.30224551406, 0.299202615138, 0.296266375831, 0.293629619064,
    0.291399057318, 0.289614924122, 0.288270375058, 0.287328763753, 0.286737584681,
    0.286438711758,
]


@pytest.fixture(scope="module")
def table():
    return build_reference()


def test_probe_matrix_and_state():
    g, psi0 = build_probe()
    assert np.array_equal(g.weights, np.array([[0, -1, 0], [-1, 0, 1], [0, 1, 0]], dtype=complex))
    assert np.vdot(psi0.amplitudes, psi0.amplitudes).real == pytest.approx(1.0, abs=1e-15)
    trace = trace_probabilities(build_propagator(g), psi0, time_grid(0, 10, 0.01))
    assert trace.vertex(2).max() < 1e-18


def test_full_set_table_values():
    t = build_reference(default_omega_grid(), 3.0, FULL)
    assert t.probs.size == 21
    assert t.probs[0] < 1e-10 and np.all(t.probs[1:] > 0)
    np.testing.assert_allclose(t.probs, FULL_T3, atol=1e-9)
    # the full set turns over near omega=0.4
    assert t.monotone_range == (0.0, pytest.approx(0.4))


def test_default_table_monotone_on_unit_interval(table):
    assert table.kinds == DEFAULT_KINDS
    assert table.probs[0] < 1e-10
    assert np.all(np.diff(table.probs) > 0)
    assert table.monotone_range == (0.0, 1.0)


def test_tiny_t_star_nothing_evolves():
    t = build_reference(default_omega_grid(), 1e-9, FULL)
    assert np.all(t.probs < 1e-8)


def test_grid_and_time_validation():
    with pytest.raises(ConfigError):
        build_reference([0.1, 0.5])
    with pytest.raises(ConfigError):
        build_reference([0.0, 0.5, 0.4])
    with pytest.raises(ConfigError):
        build_reference([0.0, 1.2])
    with pytest.raises(ConfigError):
        build_reference(t_star=0.0)


def test_nonmonotone_range_raised():
    # no jump operators: omega only slows the coherent walk, vertex 2 stays empty
    with pytest.raises(NonMonotoneRange):
        build_reference([0.0, 1.0], 3.0, ())


def test_zero_hits(table):
    est = estimate_omega(table, 0, 10**6)
    assert est.omega_hat <= 0.05
    assert est.confidence_interval[0] == 0.0


def test_round_trip_030(table):
    p = probe_probability(0.30)
    hits = int(simulate_hits(p, 10**5, seed=7).sum())
    est = estimate_omega(table, hits, 10**5)
    assert 0.27 <= est.omega_hat <= 0.33
    lo, hi = est.confidence_interval
    assert lo <= est.omega_hat <= hi


def test_clamp_above_max(table):
    est = estimate_omega(table, 10, 10)
    assert est.omega_hat == 1.0 and est.out_of_range


def test_in_range_not_flagged(table):
    est = estimate_omega(table, 2000, 10000)
    assert not est.out_of_range


def test_degenerate_and_bad_counts(table):
    with pytest.raises(DegenerateTrials):
        estimate_omega(table, 0, 0)
    with pytest.raises(ConfigError):
        estimate_omega(table, 5, 4)
    with pytest.raises(ConfigError):
        estimate_omega(table, -1, 4)


def test_nonmonotone_table_rejected():
    t = ReferenceTable([0.0, 0.5, 1.0], 3.0, [0.0, 0.2, 0.1], monotone_stop=1)
    with pytest.raises(NonMonotoneTable):
        estimate_omega(t, 1, 10)


def test_table_invariants():
    with pytest.raises(ConfigError):
        ReferenceTable([0.0, 1.0], 3.0, [1e-6, 0.3])
    with pytest.raises(ConfigError):
        ReferenceTable([0.0, 0.0], 3.0, [0.0, 0.3])
    t = ReferenceTable([0.0, 0.5, 1.0], 3.0, [0.0, 0.2, 0.1])
    assert t.monotone_range == (0.0, 0.5)


def test_estimate_interval_invariant():
    with pytest.raises(ConfigError):
        OmegaEstimate(0.5, (0.6, 0.7), 10)


def test_wilson_interval_known_value():
    # 10/100 at 95%: textbook Wilson bounds
    lo, hi = wilson_interval(10, 100)
    assert lo == pytest.approx(0.05522, abs=1e-5)
    assert hi == pytest.approx(0.17436, abs=1e-5)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 2000), st.data())
def test_estimator_monotone_in_hits(trials, data):
    table = _TABLE
    h1 = data.draw(st.integers(0, trials))
    h2 = data.draw(st.integers(h1, trials))
    assert estimate_omega(table, h1, trials).omega_hat <= estimate_omega(table, h2, trials).omega_hat


_TABLE = build_reference()


def test_csv_round_trip(table):
    back = ReferenceTable.from_csv(table.to_csv())
    assert np.array_equal(back.omega_grid, table.omega_grid)
    assert np.array_equal(back.probs, table.probs)
    assert back.measure_time == table.measure_time and back.kinds == table.kinds
    assert back.probe_fingerprint == table.probe_fingerprint


def test_simulate_hits_seeded():
    a = simulate_hits(0.3, 1000, seed=5)
    assert np.array_equal(a, simulate_hits(0.3, 1000, seed=5))
    assert set(np.unique(a)) <= {0, 1}


def test_sklearn_api():
    est = OmegaEstimator(t_star=3.0, omega_step=0.1)
    assert est.get_params() == {"t_star": 3.0, "kinds": DEFAULT_KINDS, "omega_step": 0.1, "confidence": 0.95}
    twin = clone(est).set_params(confidence=0.99)
    assert twin.confidence == 0.99 and est.confidence == 0.95
    with pytest.raises(NotFittedError):
        est.predict([0.1])
    est.fit()
    assert est.monotone_range_ == (0.0, 1.0)
    p = probe_probability(0.3)
    assert est.predict([p])[0] == pytest.approx(0.3, abs=5e-3)
    with pytest.raises(ConfigError):
        est.predict([1.5])
    out = est.estimate_samples(simulate_hits(p, 20000, seed=1))
    assert out.sample_size == 20000
    with pytest.raises(ConfigError):
        est.estimate_samples([0, 2])
