import math

import numpy as np
import pytest

from binident.channel import ChannelParams
from binident.errors import ValidationError
from binident.estimator import (
    EstimatorState, GainConfig, RateConditions, StepSchedule, check_gain_condition, innovation_plain,
    innovation_private, log_grid, run_estimator, simulate_trials, step_size, update,
)
from binident.privacy import NoiseModel
from binident.streams import agent_streams
from binident.sysmodel import ConstraintSet, RegressorGenerator

from conftest import base_mapping
from binident.config import config_from_mapping

BOX = ConstraintSet.box([6, 6])


@pytest.mark.parametrize("c, a, k, expected", [(1, 1, 1, 1.0), (1, 1, 10, 0.1), (1, 0.5, 4, 0.5)])
def test_step_size(c, a, k, expected):
    assert step_size(StepSchedule(c, a), k) == pytest.approx(expected, rel=1e-15)


def test_schedule_flags():
    assert StepSchedule(1, 1).square_summable
    assert not StepSchedule(1, 0.5).square_summable
    with pytest.raises(ValueError):
        StepSchedule(1, 1.5)
    with pytest.raises(ValueError):
        step_size(StepSchedule(), 0)


@pytest.mark.parametrize("p, q, beta, s, expected", [
    (0, 0, 1, 1, -0.5),
    (0.2, 0.3, 100, 1, -22.5),
    (0.2, 0.3, 100, 0, 27.5),
])
def test_innovation_private(p, q, beta, s, expected):
    got = innovation_private(s, GainConfig(beta), ChannelParams(p, q), 0.5)
    assert got == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("p, q, beta, s, expected", [
    (0, 0, 1, 0, 0.0),
    (0, 0, 1, 1, -1.0),
    (0.2, 0.3, 100, 1, -35.0),
])
def test_innovation_plain(p, q, beta, s, expected):
    got = innovation_plain(s, GainConfig(beta, "plain"), ChannelParams(p, q))
    assert got == pytest.approx(expected, abs=1e-12)


def test_innovation_bounded_by_beta():
    r = np.random.default_rng(8)
    for _ in range(1000):
        p, q = r.uniform(0, 1, 2)
        beta = r.uniform(0.01, 1000)
        params = ChannelParams(p, q)
        for s in (0, 1):
            for f0 in (0.5, r.uniform()):
                assert abs(innovation_private(s, GainConfig(beta), params, f0)) <= beta * (1 + 1e-12)
            assert abs(innovation_plain(s, GainConfig(beta, "plain"), params)) <= beta * (1 + 1e-12)


def test_update_examples():
    st = update(EstimatorState(np.array([1.0, 1.0]), 3), [1, 0], 2.0, 0.5, BOX)
    assert st.theta_hat.tolist() == [2.0, 1.0] and st.k == 4
    st = update(EstimatorState(np.array([5.0, 0.0])), [1, 0], 100.0, 0.1, BOX)
    assert st.theta_hat.tolist() == [6.0, 0.0]
    st = update(EstimatorState(np.array([-2.5, 4.0]), 9), [3, 7], 0.0, 0.2, BOX)
    assert st.theta_hat.tolist() == [-2.5, 4.0] and st.k == 10


def test_gain_condition_private():
    rc = RateConditions(f_lower=0.1, delta_phi=1.0, h=2, M=1.0, eta=1.0)
    rep = check_gain_condition(GainConfig(100), ChannelParams(0, 0), rc)
    assert rep.threshold == pytest.approx(5.0) and rep.satisfied


def test_gain_condition_plain():
    eta, M = 6 * math.sqrt(2), 6.0
    rc = RateConditions(f_lower=1.0, delta_phi=1.0, h=2, M=M, eta=eta)
    rep = check_gain_condition(GainConfig(100, "plain"), ChannelParams(0.2, 0.3), rc)
    assert rep.threshold == pytest.approx(eta * M / (2 * 0.25))


def test_gain_condition_boundary_is_strict():
    rc = RateConditions(f_lower=0.1, delta_phi=1.0, h=2, M=1.0, eta=1.0)
    assert not check_gain_condition(GainConfig(5.0), ChannelParams(0, 0), rc).satisfied


def test_log_grid():
    g = log_grid(100)
    assert g[0] == 1 and g[-1] == 100
    assert np.all(np.diff(g) > 0)
    assert set(math.ceil(1.1 ** j) for j in range(49)) <= set(g.tolist())


def test_zero_iterations(make_config):
    tr = run_estimator(make_config(algorithm__iterations=0), seed=1)
    assert tr.ks.tolist() == [1]
    assert tr.err_sq.tolist() == [8.0]


def test_non_identifiable_rejected():
    with pytest.raises(ValidationError) as exc:
        config_from_mapping(base_mapping(channel__p=0.6, channel__q=0.4))
    assert "non_identifiable" in exc.value.codes
    assert "non-identifiable channel" in str(exc.value)


def test_deterministic(make_config):
    cfg = make_config()
    a, b = run_estimator(cfg, 99), run_estimator(cfg, 99)
    np.testing.assert_array_equal(a.err_sq, b.err_sq)
    np.testing.assert_array_equal(a.final_estimate, b.final_estimate)
    c = run_estimator(cfg, 100)
    assert not np.array_equal(a.err_sq, c.err_sq)


def test_batch_independent_of_companions(make_config):
    cfg = make_config()
    alone = simulate_trials(cfg, [5])[0]
    batch = simulate_trials(cfg, [1, 5, 9])[1]
    np.testing.assert_array_equal(alone.err_sq, batch.err_sq)
    np.testing.assert_array_equal(alone.final_estimate, batch.final_estimate)


def reference_run(cfg, seed):
    """Scalar re-implementation of the estimator, one step at a time."""
    streams = agent_streams(seed, 0)
    gen = RegressorGenerator(cfg.regressor, streams.regressor)
    noise = cfg.noise_model()
    p, q, beta = cfg.channel.p, cfg.channel.q, cfg.algorithm.beta
    a = 1 - (p + q)
    theta = list(cfg.theta)
    th = list(cfg.initial_estimate())
    hw = cfg.constraint.half_widths
    errs = [sum((x - y) ** 2 for x, y in zip(th, theta))]
    for k in range(1, cfg.algorithm.iterations + 1):
        phi = gen.next().tolist()
        w = noise.sigma * streams.noise.standard_normal() if cfg.privacy.mode == "private" else 0.0
        u = streams.attack.random()
        y = sum(f * t for f, t in zip(phi, theta)) + w
        s0 = 1 if y <= sum(f * t for f, t in zip(phi, th)) else 0
        s = (0 if u < p else 1) if s0 == 1 else (1 if u < q else 0)
        if cfg.privacy.mode == "private":
            st = beta * a * (a * 0.5 + q - s)
        else:
            st = beta * a * (q - s)
        b = cfg.algorithm.step_scale / k ** cfg.algorithm.step_exponent
        th = [min(max(x + b * st * f, -h), h) for x, f, h in zip(th, phi, hw)]
        errs.append(sum((x - y) ** 2 for x, y in zip(th, theta)))
    return np.array(errs), np.array(th)


@pytest.mark.parametrize("mode", ["private", "plain"])
def test_matches_scalar_reference(make_config, mode):
    over = dict(algorithm__iterations=600, algorithm__log_every_step=True)
    if mode == "plain":
        over["privacy"] = {"mode": "plain"}
    cfg = make_config(**over)
    tr = run_estimator(cfg, 42)
    errs, final = reference_run(cfg, 42)
    np.testing.assert_allclose(tr.err_sq, errs, rtol=0, atol=1e-10)
    np.testing.assert_allclose(tr.final_estimate, final, rtol=0, atol=1e-12)


def test_confinement_and_displacement(make_config):
    cfg = make_config(algorithm__iterations=3000, algorithm__log_every_step=True,
                      constraint={"kind": "ball", "center": [1.0, 0.0], "radius": 4.5})
    seed = 3
    tr = run_estimator(cfg, seed, record_estimates=True)
    est = tr.estimates
    assert np.all(cfg.constraint.contains(est, tol=1e-12))
    gen = RegressorGenerator(cfg.regressor, agent_streams(seed, 0).regressor)
    phi_norm = np.linalg.norm(gen.block(cfg.algorithm.iterations), axis=1)
    k = np.arange(1, cfg.algorithm.iterations + 1)
    moves = np.linalg.norm(np.diff(est, axis=0), axis=1)
    assert np.all(moves <= (1.0 / k) * cfg.algorithm.beta * phi_norm + 1e-9)


@pytest.mark.parametrize("p, q", [(0.2, 0.3), (0.8, 0.9)])
def test_mean_innovation_points_toward_truth(p, q):
    # theta_hat frozen; E[s_tilde * phi.(theta_hat - theta)] <= 0 for p+q != 1
    r = np.random.default_rng(17)
    n = 100_000
    theta = np.array([3.0, -1.0])
    theta_hat = np.array([1.0, 1.0])
    noise = NoiseModel(1.7036)
    params = ChannelParams(p, q)
    phi = r.normal(scale=math.sqrt(2), size=(n, 2))
    gap = phi @ (theta_hat - theta)
    w = noise.sigma * r.standard_normal(n)
    s0 = (phi @ theta + w <= phi @ theta_hat).astype(int)
    s = np.where(s0 == 1, r.random(n) >= p, r.random(n) < q).astype(int)
    z = innovation_private(s, GainConfig(100), params, 0.5) * gap
    assert z.mean() <= 4 * z.std() / math.sqrt(n)
    assert z.mean() < 0
