import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from binident.privacy import (
    NoiseModel, PrivacyBudget, calibrate_sigma, cdf, q_function, q_inverse, sample_noise,
    verify_dp_condition,
)


def gaussian_tail_quad(x):
    val, _ = integrate.quad(lambda u: math.exp(-u * u / 2) / math.sqrt(2 * math.pi), x, math.inf,
                            epsabs=1e-13)
    return val


def exact_dp_delta(eps, sigma, sens):
    """Closed-form privacy profile of the scalar Gaussian mechanism."""
    a = sens / (2 * sigma)
    b = eps * sigma / sens
    return stats.norm.cdf(a - b) - math.exp(eps) * stats.norm.cdf(-a - b)


GRID = [(e, d, s) for e in (0.1, 0.2, 1.0) for d in (0.01, 0.05, 0.1) for s in (0.2, 1.0)]


def test_q_function_values():
    assert q_function(0.0) == 0.5
    assert q_function(40.0) < 1e-300
    # frozen from quad: 0.0499952174683463
    assert q_function(1.6449) == pytest.approx(0.0499952174683463, abs=1e-10)


@pytest.mark.parametrize("x", [-3.0, -0.7, 0.0, 0.4, 1.6449, 2.5, 5.0])
def test_q_function_against_quadrature(x):
    assert abs(q_function(x) - gaussian_tail_quad(x)) <= 1e-12


def test_q_function_vectorized():
    xs = np.linspace(-4, 4, 9)
    np.testing.assert_allclose(q_function(xs), [q_function(float(x)) for x in xs], rtol=1e-15, atol=1e-16)


@settings(max_examples=200, deadline=None)
@given(st.floats(-30, 30), st.floats(1e-6, 5))
def test_q_function_strictly_decreasing(x, dx):
    # only where the drop in Q is resolvable in double precision
    qx = q_function(x)
    drop = dx * math.exp(-max(x * x, (x + dx) ** 2) / 2) / math.sqrt(2 * math.pi)
    if 1e-290 < qx and drop > 4 * math.ulp(qx):
        assert qx > q_function(x + dx)


def test_q_inverse_values():
    assert q_inverse(0.5) == 0.0
    # frozen from scipy.stats.norm.isf(0.05)
    assert q_inverse(0.05) == pytest.approx(1.6448536269514729, abs=1e-11)
    assert q_inverse(q_function(2.3)) == pytest.approx(2.3, abs=1e-9)


@pytest.mark.parametrize("p", [1e-12, 1e-6, 0.01, 0.05, 0.3, 0.5, 0.8, 0.999])
def test_q_inverse_round_trip(p):
    x = q_inverse(p)
    assert abs(q_function(x) - p) <= 1e-10
    assert x == pytest.approx(stats.norm.isf(p), abs=1e-9)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_q_inverse_domain(p):
    with pytest.raises(ValueError):
        q_inverse(p)


@pytest.mark.parametrize("eps, delta, sens, expected", [
    # oracle: Delta/(2 eps) * (z + sqrt(z^2 + 2 eps)), z = norm.isf(delta)
    (0.2, 0.05, 0.2, 1.7035544225788979),
    (1.0, 0.05, 1.0, 1.907040045703637),
])
def test_calibrate_sigma_values(eps, delta, sens, expected):
    assert calibrate_sigma(PrivacyBudget(eps, delta, sens)).sigma == pytest.approx(expected, abs=1e-10)


def test_calibrate_sigma_linear_in_sensitivity():
    a = calibrate_sigma(PrivacyBudget(0.3, 0.05, 0.5)).sigma
    b = calibrate_sigma(PrivacyBudget(0.3, 0.05, 1.0)).sigma
    assert b == pytest.approx(2 * a, rel=1e-15)


def test_calibrate_sigma_monotone():
    for d in (0.01, 0.05, 0.1):
        s = [calibrate_sigma(PrivacyBudget(e, d, 1.0)).sigma for e in (0.1, 0.2, 0.5, 1.0, 2.0)]
        assert all(a > b for a, b in zip(s, s[1:]))
    for e in (0.1, 1.0):
        s = [calibrate_sigma(PrivacyBudget(e, d, 1.0)).sigma for d in (0.001, 0.01, 0.05, 0.1, 0.3)]
        assert all(a > b for a, b in zip(s, s[1:]))


@pytest.mark.parametrize("bad", [dict(epsilon=0), dict(delta=0.5), dict(delta=0), dict(sensitivity=-1)])
def test_budget_rejects(bad):
    kw = dict(epsilon=0.2, delta=0.05, sensitivity=0.2) | bad
    with pytest.raises(ValueError):
        PrivacyBudget(**kw)


def test_sample_noise():
    assert sample_noise(NoiseModel(0.0), np.random.default_rng(1), 100).tolist() == [0.0] * 100
    x = sample_noise(NoiseModel(1.7036), np.random.default_rng(2), 100_000)
    assert 1.69 <= x.std() <= 1.72
    a = sample_noise(NoiseModel(1.0), np.random.default_rng(5), 10)
    b = sample_noise(NoiseModel(1.0), np.random.default_rng(5), 10)
    np.testing.assert_array_equal(a, b)


def test_cdf():
    m = NoiseModel(1.7036)
    assert cdf(m, 0.0) == 0.5
    assert m.cdf_at_zero == 0.5
    assert cdf(m, m.sigma) == pytest.approx(0.8413447460685429, abs=1e-12)
    assert cdf(m, -m.sigma) == pytest.approx(1 - cdf(m, m.sigma), abs=1e-15)
    xs = np.linspace(-50, 50, 2001)
    f = cdf(m, xs)
    assert np.all(np.diff(f) >= 0) and f[0] >= 0 and f[-1] <= 1
    assert f[0] < 1e-100 and f[-1] == 1.0


def test_density_lower_bound():
    m = NoiseModel(2.0)
    assert m.density_lower_bound(3.0) == pytest.approx(stats.norm.pdf(3.0, scale=2.0), rel=1e-12)


@pytest.mark.parametrize("eps, delta, sens", GRID)
def test_dp_check_matches_closed_form(eps, delta, sens):
    b = PrivacyBudget(eps, delta, sens)
    sigma = calibrate_sigma(b).sigma
    slack = verify_dp_condition(b, sigma)
    assert slack == pytest.approx(delta - max(exact_dp_delta(eps, sigma, sens), 0), abs=1e-9)
    assert slack >= -1e-6


def test_dp_check_more_noise_more_slack():
    b = PrivacyBudget(0.2, 0.05, 0.2)
    sigma = calibrate_sigma(b).sigma
    assert verify_dp_condition(b, 10 * sigma) > verify_dp_condition(b, sigma)
    assert verify_dp_condition(b, sigma / 10) < 0
