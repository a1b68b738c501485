"""Network version: every agent senses, is attacked, and mixes with neighbours.

Agent ``i`` moves toward its neighbours' current estimates with weights
``a_ij`` and along its own innovation, then projects.  Rounds are
synchronous: all agents read the estimates from the start of the round.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .channel import ChannelParams, binary_quantize, tamper_with_uniform
from .estimator import (
    BLOCK, GainConfig, TrialTrajectory, innovation_plain, innovation_private, recording_grid,
)
from .graph import Adjacency, build_laplacian
from .privacy import NoiseModel
from .streams import AgentStreams, agent_streams
from .sysmodel import ConstraintSet, RegressorGenerator, RegressorSpec, project, rowdot, sqnorm

if TYPE_CHECKING:
    from .config import ExperimentConfig


@dataclass
class NetworkState:
    estimates: np.ndarray  # (n, d)
    k: int = 1


@dataclass
class AgentChannelBundle:
    """Per-agent sensing pipeline; noise level and attack law shared by all."""

    noise: NoiseModel
    channel: ChannelParams
    generators: list[RegressorGenerator]
    streams: list[AgentStreams]

    @classmethod
    def build(cls, spec: RegressorSpec, noise: NoiseModel, channel: ChannelParams, seed: int, n: int):
        streams = [agent_streams(seed, i) for i in range(n)]
        gens = [RegressorGenerator(spec, st.regressor) for st in streams]
        return cls(noise, channel, gens, streams)


def consensus_term(adj: Adjacency, estimates: np.ndarray) -> np.ndarray:
    """``sum_j a_ij (x_j - x_i)`` for every agent; agents on axis -2.

    Summed over ``j`` in index order so the result is reproducible.
    """
    x = np.asarray(estimates, dtype=float)
    out = np.zeros_like(x)
    W = adj.weights
    for j in range(adj.n):
        col = W[:, j]
        if not np.any(col):
            continue
        out = out + col[:, None] * (x[..., j:j + 1, :] - x)
    return out


def _network_advance(theta_hat, phi, s_tilde, b_k, adj, omega):
    # theta_hat, phi: (..., n, d); s_tilde: (..., n)
    mixed = theta_hat + b_k * consensus_term(adj, theta_hat)
    step = (b_k * s_tilde)[..., None] * phi
    return project(omega, mixed + step)


def distributed_step(state: NetworkState, bundle: AgentChannelBundle, adj: Adjacency, gain: GainConfig,
                     b_k: float, omega: ConstraintSet, theta) -> NetworkState:
    """One synchronous round for all agents, drawing from the bundle's streams."""
    est = np.asarray(state.estimates, dtype=float)
    n, d = est.shape
    if n != adj.n or len(bundle.generators) != n:
        raise ValueError(f"network has {n} estimates but graph has {adj.n} nodes")
    theta = np.asarray(theta, dtype=float)
    phi = np.stack([g.next() for g in bundle.generators])
    if gain.mode == "plain":
        w = np.zeros(n)
    else:
        w = np.array([bundle.noise.sigma * st.noise.standard_normal(1)[0] for st in bundle.streams])
    u = np.array([st.attack.random(1)[0] for st in bundle.streams])
    s0 = binary_quantize(rowdot(phi, theta) + w, rowdot(phi, est))
    s = tamper_with_uniform(s0, u, bundle.channel)
    if gain.mode == "plain":
        s_tilde = innovation_plain(s, gain, bundle.channel)
    else:
        s_tilde = innovation_private(s, gain, bundle.channel, bundle.noise.cdf_at_zero)
    new = _network_advance(est, phi, np.asarray(s_tilde, dtype=float), b_k, adj, omega)
    return NetworkState(estimates=new, k=state.k + 1)


@dataclass
class DistributedRun:
    """Output of one distributed trial."""

    agents: list[TrialTrajectory]
    network_mean: np.ndarray  # mean over agents of err_sq, on the grid
    disagreement: np.ndarray  # sum_{i<j} a_ij ||x_i - x_j||^2, on the grid
    ks: np.ndarray
    seed: int

    @property
    def final_disagreement(self) -> float:
        return float(self.disagreement[-1])


def simulate_network_trials(config: "ExperimentConfig", seeds: Sequence[int],
                            record_estimates: bool = False) -> list[DistributedRun]:
    t0 = time.perf_counter()
    seeds = [int(s) for s in seeds]
    T = len(seeds)
    adj = config.adjacency()
    n, d = adj.n, config.dim
    K = config.algorithm.iterations
    omega = config.constraint
    theta = np.asarray(config.theta, dtype=float)
    noise = config.noise_model()
    params = config.channel
    gain = config.gain()
    schedule = config.schedule()
    plain = gain.mode == "plain"
    f0 = noise.cdf_at_zero

    streams = [[agent_streams(s, i) for i in range(n)] for s in seeds]
    gens = [[RegressorGenerator(config.regressor, st.regressor) for st in row] for row in streams]

    est = np.tile(config.initial_estimate(), (T, n, 1))
    grid = recording_grid(config)
    G = len(grid)
    rec_err = np.empty((T, n, G))
    rec_dis = np.empty((T, G))
    rec_est = np.empty((T, n, G, d)) if record_estimates else None
    gi = 0

    def record(k, x):
        nonlocal gi
        if gi < G and grid[gi] == k:
            rec_err[:, :, gi] = sqnorm(x - theta)
            rec_dis[:, gi] = adj.disagreement(x)
            if rec_est is not None:
                rec_est[:, :, gi] = x
            gi += 1

    record(1, est)
    k = 1
    while k <= K:
        m = min(BLOCK, K - k + 1)
        phis = np.stack([np.stack([g.block(m) for g in row], axis=1) for row in gens])  # (T, m, n, d)
        if plain:
            ws = np.zeros((T, m, n))
        else:
            ws = np.stack([np.stack([noise.sigma * st.noise.standard_normal(m) for st in row], axis=1)
                           for row in streams])
        us = np.stack([np.stack([st.attack.random(m) for st in row], axis=1) for row in streams])
        for j in range(m):
            phi = phis[:, j]
            s0 = binary_quantize(rowdot(phi, theta) + ws[:, j], rowdot(phi, est))
            s = tamper_with_uniform(s0, us[:, j], params)
            if plain:
                s_tilde = innovation_plain(s, gain, params)
            else:
                s_tilde = innovation_private(s, gain, params, f0)
            est = _network_advance(est, phi, s_tilde, schedule(k), adj, omega)
            k += 1
            record(k, est)

    wall = time.perf_counter() - t0
    runs = []
    for t in range(T):
        agents = [
            TrialTrajectory(ks=grid.copy(), err_sq=rec_err[t, i].copy(), seed=seeds[t], mode=gain.mode,
                            final_estimate=est[t, i].copy(), wall_time=wall / max(T, 1),
                            estimates=None if rec_est is None else rec_est[t, i].copy())
            for i in range(n)
        ]
        runs.append(DistributedRun(agents=agents, network_mean=rec_err[t].mean(axis=0),
                                   disagreement=rec_dis[t].copy(), ks=grid.copy(), seed=seeds[t]))
    return runs


def run_distributed(config: "ExperimentConfig", seed: int, record_estimates: bool = False) -> DistributedRun:
    config.validate_for("distributed")
    return simulate_network_trials(config, [seed], record_estimates=record_estimates)[0]


def lambda2(config: "ExperimentConfig") -> float:
    return build_laplacian(config.adjacency()).lambda2
