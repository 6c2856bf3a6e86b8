import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from infotrade import CashFlowSpec, InformedParams, TimeGrid
from infotrade.filter import posterior_probs, price_function
from infotrade.market import synthesize_batch
from infotrade.metrics import (
    InfoReport,
    QuadratureConfig,
    bridge_entropy,
    conditional_price_entropy,
    cumulative_volatility_check,
    delta_J,
    expected_entropy,
    info_report,
    joint_density,
    mixture_entropy,
    mutual_information,
    mutual_information_direct,
    price_entropy,
    price_entropy_correction,
    shannon_entropy,
    write_info_csv,
)
from infotrade.montecarlo import MCConfig
from infotrade._numerics import simpson
from infotrade.paths import bridge_variance

# 0.75 * N(0.25; 0.25, 0.8) and 0.5 ln(2 pi e / 4), both with the math module
JOINT_ORACLE = 0.3345232717786446
BRIDGE_HALF = 0.7257913526447274


def normal_pdf(x, m, v):
    return np.exp(-0.5 * (x - m) ** 2 / v) / np.sqrt(2 * np.pi * v)


def test_joint_density_marginals(spec3):
    v = bridge_variance(1.0, 5.0)
    x = np.linspace(-10, 10, 40_001)
    for i in range(3):
        mass = simpson(joint_density(x, i, 1.0, spec3, 0.25, 5.0), x[1] - x[0])
        assert abs(mass - spec3.p[i]) < 1e-8
        peak = joint_density(0.25 * spec3.x[i], i, 1.0, spec3, 0.25, 5.0)
        assert peak == pytest.approx(spec3.p[i] / np.sqrt(2 * np.pi * v), rel=1e-14)
    assert joint_density(0.25, 2, 1.0, spec3, 0.25, 5.0) == pytest.approx(JOINT_ORACLE, rel=1e-14)


def test_bridge_entropy_values():
    assert bridge_entropy(0.5, 1.0) == pytest.approx(BRIDGE_HALF, abs=1e-15)
    assert bridge_entropy(0.2, 1.0) == pytest.approx(bridge_entropy(0.8, 1.0), abs=1e-14)
    grid = np.linspace(0.01, 0.99, 99)
    h = [bridge_entropy(t, 1.0) for t in grid]
    assert grid[int(np.argmax(h))] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        bridge_entropy(1.0, 1.0)


def test_single_outcome_mixture_is_bridge():
    spec = CashFlowSpec((3.0,), (1.0,))
    assert mixture_entropy(0.4, spec, 0.5, 1.0) == bridge_entropy(0.4, 1.0)
    assert mutual_information(0.4, spec, 0.5, 1.0) == 0.0


def test_mixture_entropy_node_doubling(spec3):
    for t in (0.5, 2.5, 4.9):
        a = mixture_entropy(t, spec3, 0.5, 5.0, QuadratureConfig(nodes=2001))
        b = mixture_entropy(t, spec3, 0.5, 5.0, QuadratureConfig(nodes=4001))
        assert abs(a - b) < 1e-8


def test_mixture_entropy_monte_carlo(spec3):
    t, T, sigma = 2.0, 5.0, 0.5
    g = TimeGrid(T, 5)
    b = synthesize_batch(spec3, sigma, None, g, 0, np.arange(100_000))
    xi = b.xi[:, g.index_of(t)]
    dens = sum(spec3.p[i] * normal_pdf(xi, sigma * spec3.x[i] * t, bridge_variance(t, T)) for i in range(3))
    s = -np.log(dens)
    est, se = s.mean(), s.std(ddof=1) / np.sqrt(s.size)
    assert abs(est - mixture_entropy(t, spec3, sigma, T)) < 3 * se


def test_mutual_information_limits(spec3):
    T = 5.0
    for sigma in (0.25, 0.5, 0.75):
        assert abs(mutual_information(T - T / 2000, spec3, sigma, T) - spec3.prior_entropy) < 0.01
        assert mutual_information(1e-4, spec3, sigma, T) < 1e-3
    assert mutual_information(2.0, spec3, 0.0, T) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 1.5))
def test_mutual_information_routes_agree_and_bounded(u, sigma):
    spec = CashFlowSpec((0.0, 0.5, 1.0), (0.1, 0.15, 0.75))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        j = mutual_information(u * 5.0, spec, sigma, 5.0)
    assert abs(j - mutual_information_direct(u * 5.0, spec, sigma, 5.0)) < 1e-6
    assert -1e-12 <= j <= spec.prior_entropy + 1e-9


def test_mutual_information_depends_on_signal_to_noise_only(spec3):
    # J depends on (sigma, t, T) only through sigma^2 t T / (T - t)
    a = mutual_information(1.0, spec3, 0.5, 5.0)
    s2 = 0.25 * 1.0 * 5.0 / 4.0
    t2, T2 = 0.5, 2.0
    b = mutual_information(t2, spec3, np.sqrt(s2 * (T2 - t2) / (t2 * T2)), T2)
    assert a == pytest.approx(b, abs=1e-10)


def test_shannon_entropy_cases(spec3):
    assert shannon_entropy([0.0, 1.0, 0.0]) == 0.0
    assert shannon_entropy(np.full(7, 1 / 7)) == pytest.approx(np.log(7))
    assert shannon_entropy(spec3.p) == pytest.approx(0.7305880614, abs=1e-10)


def test_expected_entropy_endpoints(spec3):
    g = TimeGrid(5.0, 1000)
    m, se = expected_entropy([0.0, g.eval_times[-1]], spec3, 0.25, g, MCConfig(10_000, seed=1))
    # every path has exactly the prior; only the averaging rounds
    assert m[0] == pytest.approx(spec3.prior_entropy, abs=1e-12)
    assert se[0] < 1e-12
    assert m[1] < 0.02


def test_expected_entropy_identity_half_horizon(spec3):
    g = TimeGrid(5.0, 100)
    m, se = expected_entropy([2.5], spec3, 0.25, g, MCConfig(10_000, seed=2))
    J = mutual_information(2.5, spec3, 0.25, 5.0)
    assert abs(spec3.prior_entropy - m[0] - J) < 3 * se[0]


def test_expected_entropy_rejects_off_grid(spec3):
    g = TimeGrid(5.0, 100)
    with pytest.raises(ValueError):
        expected_entropy([0.01], spec3, 0.25, g, MCConfig(10))
    with pytest.raises(ValueError):
        expected_entropy([5.0], spec3, 0.25, g, MCConfig(10))


def test_cumulative_volatility_degenerate_cases(spec3):
    g = TimeGrid(5.0, 200)
    m, _ = cumulative_volatility_check(CashFlowSpec((1.0,), (1.0,)), 0.25, g, MCConfig(50))
    assert m == 0.0
    m, _ = cumulative_volatility_check(spec3, 1e-9, g, MCConfig(50))
    assert m < 1e-15


def test_cumulative_volatility_near_prior_entropy(spec3):
    g = TimeGrid(5.0, 2000)
    m, se = cumulative_volatility_check(spec3, 0.25, g, MCConfig(2000, seed=3))
    assert abs(m / spec3.prior_entropy - 1) < 0.05 + 3 * se / spec3.prior_entropy


def _correction_fd(t, spec, sigma, T, P, quad=QuadratureConfig()):
    # same integral with B' from central differences of the price function
    from infotrade.metrics import _component_logpdf, _support
    from infotrade._numerics import log_normalizer

    x, h = _support(t, spec, sigma, T, quad)
    rho = np.exp(log_normalizer(_component_logpdf(x, t, spec, sigma, T)))
    e = 1e-5
    d = (price_function(t, x + e, spec, sigma, T, P) - price_function(t, x - e, spec, sigma, T, P)) / (2 * e)
    with np.errstate(divide="ignore"):
        ld = np.log(d)
    return simpson(np.where(rho > 1e-300, rho * np.where(np.isfinite(ld), ld, 0), 0), h)


def test_price_entropy_correction_two_forms(spec3):
    for t in (0.5, 2.5):
        a = price_entropy_correction(t, spec3, 0.25, 5.0, 0.9)
        b = _correction_fd(t, spec3, 0.25, 5.0, 0.9)
        assert abs(a - b) < 1e-6


def test_price_entropy_correction_monte_carlo(spec3):
    from infotrade.filter import price_function_derivative

    t, T = 2.5, 5.0
    g = TimeGrid(T, 2)
    b = synthesize_batch(spec3, 0.25, None, g, 4, np.arange(20_000))
    s = np.log(price_function_derivative(t, b.xi[:, 1], spec3, 0.25, T, 0.9))
    est, se = s.mean(), s.std(ddof=1) / np.sqrt(s.size)
    assert abs(est - price_entropy_correction(t, spec3, 0.25, T, 0.9)) < 3 * se


def test_price_mutual_information_invariance(spec3):
    for t in (0.5, 2.5, 4.0):
        jb = price_entropy(t, spec3, 0.25, 5.0, 0.9) - conditional_price_entropy(t, spec3, 0.25, 5.0, 0.9)
        assert abs(jb - mutual_information(t, spec3, 0.25, 5.0)) < 1e-4


def test_price_entropy_sign_of_log_slope(digital):
    for P in (0.2, 0.9, 5.0, 50.0):
        diff = price_entropy(0.5, digital, 0.5, 1.0, P) - mixture_entropy(0.5, digital, 0.5, 1.0)
        corr = price_entropy_correction(0.5, digital, 0.5, 1.0, P)
        assert np.sign(diff) == np.sign(corr)


def test_price_entropy_needs_two_outcomes():
    with pytest.raises(ValueError):
        price_entropy(0.5, CashFlowSpec((1.0,), (1.0,)), 0.5, 1.0, 0.9)


def test_delta_j_zero_at_critical_level(digital):
    g = TimeGrid(1.0, 100)
    inf = InformedParams(0.15 * 0.25, 0.15)
    est = delta_J([0.2, 0.5, 0.8], digital, 0.25, inf, g, MCConfig(2000))
    assert np.all(np.abs(est.delta) <= 3 * est.se + 1e-12)


def test_delta_j_paired_and_positive(digital, informed):
    g = TimeGrid(1.0, 100)
    est = delta_J([0.5], digital, 0.25, informed, g, MCConfig(4000))
    assert est.delta[0] > 3 * est.se[0]
    assert est.delta[0] == pytest.approx(est.market_entropy[0] - est.informed_entropy[0], abs=1e-14)


def test_info_report_csv(tmp_path, spec3):
    rows = [info_report(t, spec3, 0.25, 5.0) for t in (1.0, 2.0)]
    f = tmp_path / "info.csv"
    write_info_csv(f, rows)
    lines = f.read_text().splitlines()
    assert lines[0] == "t,J,H_xi,H_bridge,H0,E_Ht,se_E_Ht,deltaJ,se_deltaJ"
    assert lines[1].endswith(",,,,")
    with pytest.raises(ValueError):
        InfoReport(t=1.0, J=-0.1, H_xi=0, H_bridge=0, H0=0)


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(nodes=2000)
    with pytest.raises(ValueError):
        QuadratureConfig(rule="gauss")
