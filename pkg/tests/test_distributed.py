import numpy as np
import pytest

from binident.channel import ChannelParams
from binident.distributed import (
    AgentChannelBundle, NetworkState, consensus_term, distributed_step, run_distributed,
    simulate_network_trials,
)
from binident.errors import ValidationError
from binident.estimator import GainConfig, run_estimator
from binident.graph import Adjacency, named_topology
from binident.privacy import NoiseModel
from binident.sysmodel import ConstraintSet, RegressorSpec, project

BOX = ConstraintSet.box([6, 6])


def bundle(n, seed=0, p=0.2, q=0.3):
    return AgentChannelBundle.build(RegressorSpec(dim=2), NoiseModel(1.0), ChannelParams(p, q), seed, n)


def test_consensus_arithmetic():
    adj = Adjacency([[0, 0.5], [0.5, 0]])
    x = np.array([[2.0, 0.0], [0.0, 0.0]])
    new = x + 0.1 * consensus_term(adj, x)
    np.testing.assert_allclose(new, [[1.9, 0.0], [0.1, 0.0]], rtol=0, atol=1e-15)


def test_identical_estimates_have_no_consensus_pull():
    adj = named_topology("cycle", 5, 0.5)
    x = np.tile([1.5, -2.0], (5, 1))
    assert np.all(consensus_term(adj, x) == 0)


def test_step_consensus_only():
    # beta ~ 0 removes the innovation, leaving the consensus arithmetic
    adj = Adjacency([[0, 0.5], [0.5, 0]])
    state = NetworkState(np.array([[2.0, 0.0], [0.0, 0.0]]))
    out = distributed_step(state, bundle(2), adj, GainConfig(1e-300), 0.1, BOX, [3.0, -1.0])
    np.testing.assert_allclose(out.estimates, [[1.9, 0.0], [0.1, 0.0]], rtol=0, atol=1e-12)
    assert out.k == 2


def test_step_matches_two_phase_reference():
    r = np.random.default_rng(6)
    for trial in range(20):
        n = int(r.integers(2, 6))
        w = np.triu(r.uniform(0, 1, (n, n)) * (r.random((n, n)) < 0.7), 1)
        adj = Adjacency(w + w.T)
        est = r.uniform(-5, 5, (n, 2))
        b = float(r.uniform(0.01, 0.5))
        gain = GainConfig(float(r.uniform(1, 50)))
        out = distributed_step(NetworkState(est.copy()), bundle(n, seed=trial), adj, gain, b, BOX, [3.0, -1.0])

        # two-phase reference: replay the same draws, then update from a frozen copy
        ref_bundle = bundle(n, seed=trial)
        frozen = est.copy()
        new = np.empty_like(frozen)
        params = ref_bundle.channel
        a = params.attenuation
        draws = []
        for i in range(n):
            phi = ref_bundle.generators[i].next()
            wv = ref_bundle.noise.sigma * ref_bundle.streams[i].noise.standard_normal(1)[0]
            u = ref_bundle.streams[i].attack.random(1)[0]
            draws.append((phi, wv, u))
        for i in range(n):
            phi, wv, u = draws[i]
            s0 = int(phi @ np.array([3.0, -1.0]) + wv <= phi @ frozen[i])
            s = (0 if u < params.p else 1) if s0 else (1 if u < params.q else 0)
            st = gain.beta * a * (a * 0.5 + params.q - s)
            pull = sum(adj.weights[i, j] * (frozen[j] - frozen[i]) for j in range(n))
            new[i] = project(BOX, frozen[i] + b * pull + b * st * phi)
        np.testing.assert_allclose(out.estimates, new, rtol=0, atol=1e-12)


def test_single_node_matches_single_center(make_config):
    cfg = make_config(graph={"weights": [[0.0]]}, algorithm__iterations=3000)
    for seed in (1, 2, 3):
        net = run_distributed(cfg, seed)
        solo = run_estimator(cfg, seed)
        np.testing.assert_array_equal(net.agents[0].err_sq, solo.err_sq)
        np.testing.assert_array_equal(net.agents[0].final_estimate, solo.final_estimate)


def test_disconnected_graph_rejected(make_config):
    cfg = make_config(graph={"topology": "cycle", "nodes": 4, "weight": 0.0})
    with pytest.raises(ValidationError) as exc:
        run_distributed(cfg, 1)
    assert "disconnected_graph" in exc.value.codes


def test_graph_required(make_config):
    with pytest.raises(ValidationError) as exc:
        run_distributed(make_config(), 1)
    assert "missing_field" in exc.value.codes


def test_network_confinement_and_determinism(make_config):
    cfg = make_config(graph={"topology": "cycle", "nodes": 4, "weight": 0.5},
                      constraint={"kind": "ball", "center": [0.0, 0.0], "radius": 5.0},
                      algorithm__iterations=1500, algorithm__log_every_step=True)
    a = run_distributed(cfg, 8, record_estimates=True)
    for tr in a.agents:
        assert np.all(cfg.constraint.contains(tr.estimates, tol=1e-12))
    b = simulate_network_trials(cfg, [3, 8])[1]
    for ta, tb in zip(a.agents, b.agents):
        np.testing.assert_array_equal(ta.err_sq, tb.err_sq)
    np.testing.assert_array_equal(a.disagreement, b.disagreement)


def test_short_run_converges_and_agrees(make_config):
    cfg = make_config(graph={"topology": "cycle", "nodes": 5, "weight": 0.5}, algorithm__iterations=20000,
                      privacy={"mode": "private", "epsilon": 1.0, "delta": 0.05, "sensitivity": 1.0},
                      channel={"p": 0.2, "q": 0.4})
    run = run_distributed(cfg, 5)
    assert all(tr.final_err_sq < 0.1 for tr in run.agents)
    assert run.disagreement[-1] < run.disagreement[len(run.disagreement) // 3]
