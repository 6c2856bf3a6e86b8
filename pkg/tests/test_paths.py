import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from infotrade.paths import (
    TimeGrid,
    bridge_from_brownian,
    bridge_variance,
    path_rng,
    simulate_brownian_pair,
    simulate_brownian_pairs,
)


def test_grid_basics():
    g = TimeGrid(5.0, 2000)
    assert g.times[0] == 0.0 and g.times[-1] == 5.0
    assert g.eps == g.dt == 5.0 / 2000
    assert g.eval_times[-1] == pytest.approx(5.0 - g.eps)
    assert g.n_eval == 2000
    assert TimeGrid(1.0, 100, guard=0.1).eval_times[-1] == pytest.approx(0.9)


@pytest.mark.parametrize("kw", [dict(horizon=0, steps=10), dict(horizon=1, steps=1), dict(horizon=1, steps=10, guard=1.0)])
def test_grid_rejects_bad_input(kw):
    with pytest.raises(ValueError):
        TimeGrid(**kw)


def test_independent_increments_uncorrelated():
    g = TimeGrid(1.0, 10_000)
    B, Bp = simulate_brownian_pair(g, 0.0, seed=3)
    c = np.corrcoef(np.diff(B), np.diff(Bp))[0, 1]
    # se of a sample correlation under independence is about 1/sqrt(n)
    assert abs(c) < 3 / np.sqrt(10_000)


def test_same_key_same_path():
    g = TimeGrid(1.0, 200)
    a = simulate_brownian_pair(g, 0.4, seed=11, path_index=7)
    b = simulate_brownian_pair(g, 0.4, seed=11, path_index=7)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    c = simulate_brownian_pair(g, 0.4, seed=11, path_index=8)
    assert not np.array_equal(a[0], c[0])


def test_stacked_rows_match_single_paths():
    g = TimeGrid(1.0, 50)
    B, Bp = simulate_brownian_pairs(g, -0.3, 5, [4, 0, 9])
    for row, i in enumerate([4, 0, 9]):
        b, bp = simulate_brownian_pair(g, -0.3, 5, i)
        assert np.array_equal(B[row], b) and np.array_equal(Bp[row], bp)


def test_terminal_correlation_rho_09():
    g = TimeGrid(1.0, 500)
    B, Bp = simulate_brownian_pairs(g, 0.9, 0, np.arange(2000))
    c = np.corrcoef(B[:, -1], Bp[:, -1])[0, 1]
    assert 0.88 <= c <= 0.92


@pytest.mark.parametrize("rho", [1.0, -1.0, 1.5])
def test_rho_outside_open_interval(rho):
    with pytest.raises(ValueError, match="open interval"):
        simulate_brownian_pair(TimeGrid(1.0, 10), rho, 0)


def test_streams_are_distinct():
    a = path_rng(1, 2, 0).random(4)
    b = path_rng(1, 2, 1).random(4)
    assert not np.array_equal(a, b)


def test_bridge_of_zero_path_is_zero():
    g = TimeGrid(2.0, 40)
    assert np.array_equal(bridge_from_brownian(np.zeros(41), g), np.zeros(41))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-0.99, 0.99))
def test_bridge_pinned_at_both_ends(seed, rho):
    g = TimeGrid(3.0, 64)
    B, Bp = simulate_brownian_pair(g, rho, seed)
    for b in (bridge_from_brownian(B, g), bridge_from_brownian(Bp, g)):
        assert b[0] == 0.0 and b[-1] == 0.0


def test_bridge_wrong_length():
    with pytest.raises(ValueError):
        bridge_from_brownian(np.zeros(5), TimeGrid(1.0, 10))


def test_bridge_variance_midpoint_monte_carlo():
    g = TimeGrid(1.0, 20)
    B, _ = simulate_brownian_pairs(g, 0.0, 1, np.arange(10_000))
    mid = bridge_from_brownian(B, g)[:, 10]
    v = mid.var(ddof=1)
    # se of a Gaussian sample variance: sigma^2 sqrt(2/(n-1))
    assert abs(v - 0.25) < 3 * 0.25 * np.sqrt(2 / 9999)


def test_bridge_variance_closed_form():
    assert bridge_variance(0.0, 3.0) == 0.0
    assert bridge_variance(3.0, 3.0) == 0.0
    assert bridge_variance(1.5, 3.0) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        bridge_variance(4.0, 3.0)


@given(st.floats(0, 1), st.floats(0.1, 10))
def test_bridge_variance_symmetric_and_bounded(u, T):
    t = u * T
    assert bridge_variance(t, T) == pytest.approx(bridge_variance(T - t, T), abs=1e-12)
    assert 0 <= bridge_variance(t, T) <= T / 4 + 1e-12
