import math

import numpy as np
import pytest

from qcoarse import (
    RngStream,
    SuppressionForecast,
    expected_max_quantile,
    fit_suppression_curve,
    forecast_suppression,
    monte_carlo_max_mean,
)


# ------------------------------------------------------------- max quantile


def test_quantile_two_draws_is_zero():
    # sf(0) = 1/2 exactly
    assert expected_max_quantile(2) == pytest.approx(0.0, abs=1e-12)


def test_quantile_hundred_draws():
    assert expected_max_quantile(100) == pytest.approx(2.326347874040848,
                                                       abs=1e-12)


def test_quantile_monotone_and_accepts_real_d():
    xs = [expected_max_quantile(d) for d in (2, 2.5, 10, 100, 1e4, 1e8)]
    assert all(b > a for a, b in zip(xs, xs[1:]))


def test_quantile_needs_two_draws():
    with pytest.raises(ValueError):
        expected_max_quantile(1.5)


def test_quantile_tracks_monte_carlo_mean():
    d = 10_000
    mc = monte_carlo_max_mean(d, 4000, RngStream(2024))
    assert abs(mc - expected_max_quantile(d)) / mc < 0.05


def test_monte_carlo_input_validation(g):
    with pytest.raises(ValueError):
        monte_carlo_max_mean(0, 10, g)
    with pytest.raises(ValueError):
        monte_carlo_max_mean(10, 0, g)


# ------------------------------------------------------------------ forecast


def test_forecast_frozen_value():
    fc = forecast_suppression(math.log(256.0), 1.0, 256)
    expected = (1.0 / math.sqrt(2.0)) * expected_max_quantile(256) / 16.0
    assert fc.predicted_D == pytest.approx(expected, abs=1e-15)
    assert fc.predicted_D == pytest.approx(0.11755948409207095, abs=1e-12)
    assert fc.envelope == 1.0
    assert fc.leading_form == pytest.approx(
        math.sqrt(math.log(256.0)) * math.exp(-math.log(256.0) / 2.0), abs=1e-15)


def test_forecast_zero_envelope():
    fc = forecast_suppression(2.0, 0.0, 50)
    assert fc.predicted_D == 0.0
    assert fc.bracket[0] == math.inf
    assert fc.bracket[1] == 0.0


def test_forecast_bracket_sandwiches_prediction():
    for s in (math.log(16), math.log(64), math.log(512)):
        for f in (0.5, 1.0, 2.0):
            fc = forecast_suppression(s, f, 100)
            k_up, k_low = fc.bracket
            assert k_low <= k_up
            assert math.exp(-k_up * s) - 1e-12 <= fc.predicted_D
            assert fc.predicted_D <= math.exp(-k_low * s) + 1e-12


def test_forecast_decreasing_in_entropy():
    vals = [forecast_suppression(s, 1.0, 128).predicted_D
            for s in np.linspace(math.log(16), math.log(4096), 12)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_forecast_input_validation():
    with pytest.raises(ValueError):
        forecast_suppression(0.0, 1.0, 10)
    with pytest.raises(ValueError):
        forecast_suppression(1.0, -0.5, 10)
    with pytest.raises(ValueError):
        forecast_suppression(1.0, 1.0, 1)


def test_forecast_record_rejects_broken_envelope():
    with pytest.raises(ValueError):
        SuppressionForecast(S=2.0, x_d=1.0, envelope=1.0, predicted_D=0.5,
                            bracket=(0.1, 0.9))  # exponents out of order
    with pytest.raises(ValueError):
        SuppressionForecast(S=2.0, x_d=1.0, envelope=1.0, predicted_D=0.9,
                            bracket=(1.0, 0.5))  # 0.9 > e^{-0.5*2}


# ----------------------------------------------------------------- curve fit


def test_fit_recovers_exact_leading_form():
    s = np.linspace(math.log(16), math.log(512), 7)
    pts = [(si, math.sqrt(si) * math.exp(-si / 2.0)) for si in s]
    out = fit_suppression_curve(pts)
    assert out["slope"] == pytest.approx(-0.5, abs=1e-10)
    assert out["intercept"] == pytest.approx(0.0, abs=1e-10)
    assert out["r_squared"] == pytest.approx(1.0, abs=1e-12)


def test_fit_with_multiplicative_noise():
    g = RngStream(1717).generator()
    s = np.linspace(math.log(16), math.log(512), 9)
    pts = [(si, math.sqrt(si) * math.exp(-si / 2.0) * math.exp(g.normal(0, 0.1)))
           for si in s]
    out = fit_suppression_curve(pts)
    assert out["slope"] == pytest.approx(-0.5, abs=0.06)


def test_fit_envelope_exponents_are_pointwise():
    g = RngStream(23).generator()
    s = np.linspace(2.0, 7.0, 8)
    d = np.exp(-0.45 * s) * np.exp(g.normal(0, 0.05, size=8))
    out = fit_suppression_curve(zip(s, d))
    assert out["k_lower"] <= out["k_upper"]
    for si, di in zip(s, d):
        assert math.exp(-out["k_upper"] * si) <= di * (1 + 1e-12)
        assert di <= math.exp(-out["k_lower"] * si) * (1 + 1e-12)


def test_fit_input_validation():
    with pytest.raises(ValueError):
        fit_suppression_curve([(1.0, 0.5), (2.0, 0.3)])  # too few points
    with pytest.raises(ValueError):
        fit_suppression_curve([(1.0, 0.5), (1.0, 0.4), (1.0, 0.3)])  # same S
    with pytest.raises(ValueError):
        fit_suppression_curve([(1.0, 0.5), (2.0, 0.0), (3.0, 0.2)])  # D = 0
    with pytest.raises(ValueError):
        fit_suppression_curve([(1.0, 0.5), (-2.0, 0.1), (3.0, 0.2)])  # S < 0
