import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsa_kinetics import ldf
from rsa_kinetics.errors import ConfigurationError, DomainError, SimulationError
from rsa_kinetics.sim import (
    SimulationSpec,
    monte_carlo,
    monte_carlo_all,
    simulate_exact,
    simulate_ghost,
    simulate_rejection,
    simulate_replicates,
)

EXAMPLE3 = ldf.discrete([(1.0, 0.5), (1.3, 0.3), (1.5, 0.2)])
LDFS = [EXAMPLE3, ldf.power_law(1.0), ldf.inverse_power(2.0), ldf.exponential(-1.0), ldf.power_law(3.0)]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(LDFS), st.floats(0.0, 300.0), st.integers(0, 2**32), st.booleans())
def test_saturation_invariants(d, L, seed, use_rejection):
    rng = np.random.default_rng(seed)
    state = simulate_rejection(d, L, rng) if use_rejection else simulate_exact(d, L, rng)
    state.check()
    assert state.saturated
    assert 0.0 <= state.empty_space <= L + 1e-12
    assert np.all(state.lengths >= 1.0)
    if d.kind is ldf.Kind.DISCRETE:
        assert set(np.unique(state.lengths)) <= set(d.lengths)


def test_short_line_stays_empty():
    rng = np.random.default_rng(0)
    for L in (0.0, 0.5, 1.0):
        s = simulate_exact(ldf.power_law(1.0), L, rng)
        assert s.n_segments == 0 and s.empty_space == L


def test_unit_cars_two_to_three():
    # unit cars on L=3: exactly two park, almost surely
    rng = np.random.default_rng(5)
    for _ in range(200):
        assert simulate_exact(ldf.discrete([(1.0, 1.0)]), 3.0, rng).n_segments == 2


def test_exact_vs_rejection_small():
    d = ldf.power_law(1.0)
    a = monte_carlo(SimulationSpec("rsa", d, 4.0, "S"), 40_000, seed=3)
    b = monte_carlo(SimulationSpec("rejection", d, 4.0, "S"), 40_000, seed=4)
    assert abs(a.mean - b.mean) <= 4 * math.hypot(a.stderr, b.stderr)


def test_literal_rejection_agrees():
    d = EXAMPLE3
    a = monte_carlo(SimulationSpec("rejection", d, 5.0, "N"), 20_000, seed=8)
    b = monte_carlo(SimulationSpec("rejection", d, 5.0, "N", literal=True), 20_000, seed=9)
    assert abs(a.mean - b.mean) <= 4 * math.hypot(a.stderr, b.stderr)


def test_attempt_cap_raises_with_index():
    spec = SimulationSpec("rejection", ldf.power_law(1.0), 50.0, attempt_cap=3)
    with pytest.raises(SimulationError) as exc:
        simulate_replicates(spec, 5, seed=1)
    assert exc.value.replicate == 0
    state = simulate_rejection(ldf.power_law(1.0), 50.0, np.random.default_rng(1), attempt_cap=3)
    assert not state.saturated


def test_ghost_single_type_closed_form():
    est = monte_carlo(SimulationSpec("ghost", ldf.discrete([(1.0, 1.0)]), 100.0, "N"), 4000, seed=2)
    assert abs(est.mean - 49.5) <= 4 * est.stderr


def test_ghost_counts_shape():
    counts = simulate_ghost([1.0, 2.0], [0.5, 0.5], 50.0, np.random.default_rng(0))
    assert counts.shape == (2,) and counts.sum() > 0
    with pytest.raises(ConfigurationError):
        monte_carlo(SimulationSpec("ghost", ldf.power_law(1.0), 10.0), 10)


def test_reproducible_and_thread_independent(monkeypatch):
    spec = SimulationSpec("rsa", EXAMPLE3, 60.0)
    a = simulate_replicates(spec, 2500, seed=42, batch_size=300, threads=1)
    b = simulate_replicates(spec, 2500, seed=42, batch_size=300, threads=4)
    monkeypatch.setenv("RSA_KINETICS_THREADS", "2")
    c = simulate_replicates(spec, 2500, seed=42, batch_size=300)
    assert np.array_equal(a, b) and np.array_equal(a, c)
    d = simulate_replicates(spec, 2500, seed=43, batch_size=300, threads=1)
    assert not np.array_equal(a, d)


def test_bad_thread_env(monkeypatch):
    monkeypatch.setenv("RSA_KINETICS_THREADS", "zero")
    with pytest.raises(ConfigurationError):
        simulate_replicates(SimulationSpec("rsa", EXAMPLE3, 5.0), 10)


def test_single_replicate_stderr_nan():
    est = monte_carlo(SimulationSpec("rsa", EXAMPLE3, 20.0), 1)
    assert math.isnan(est.stderr) and est.replicates == 1


def test_estimand_consistency():
    res = monte_carlo_all(SimulationSpec("rsa", EXAMPLE3, 30.0), 500, seed=1)
    assert res["S/L"].mean == pytest.approx(res["S"].mean / 30.0)
    assert res["coverage"].mean == pytest.approx(1 - res["S/L"].mean)
    lens = [1.0, 1.3, 1.5]
    covered = sum(l * res[f"N{k + 1}"].mean for k, l in enumerate(lens))
    assert covered == pytest.approx(30.0 - res["S"].mean)
    assert res["N"].mean == pytest.approx(sum(res[f"N{k}"].mean for k in (1, 2, 3)))


def test_bad_configs():
    with pytest.raises(ConfigurationError):
        monte_carlo(SimulationSpec("teleport", EXAMPLE3, 5.0), 10)
    with pytest.raises(ConfigurationError):
        monte_carlo(SimulationSpec("rsa", EXAMPLE3, 5.0, "N7"), 10)
    with pytest.raises(ConfigurationError):
        monte_carlo(SimulationSpec("rsa", EXAMPLE3, 5.0), 0)
    with pytest.raises(DomainError):
        simulate_exact(EXAMPLE3, -1.0, np.random.default_rng())
