"""Projected recursive estimator driven by tampered 1-bit observations.

Each step draws a regressor, quantizes the private output against the
current prediction ``phi . theta_hat``, passes the bit through the attack
channel, forms a bias-corrected innovation and takes a projected step.

The simulation kernel runs a batch of independent trials side by side.
Every trial owns its own random streams and all arithmetic is row-wise, so
a trial's trajectory does not depend on which batch it ran in.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .channel import ChannelParams, binary_quantize, tamper_with_uniform
from .sysmodel import ConstraintSet, RegressorGenerator, project, rowdot, sqnorm
from .streams import agent_streams

if TYPE_CHECKING:
    from .config import ExperimentConfig

log = logging.getLogger(__name__)

# steps drawn from the random streams at a time
BLOCK = 4096


@dataclass(frozen=True)
class StepSchedule:
    """Power-law step sizes ``b_k = scale / k**exponent``."""

    scale: float = 1.0
    exponent: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("step scale must be > 0")
        if not 0 < self.exponent <= 1:
            raise ValueError("step exponent must lie in (0, 1]")

    @property
    def square_summable(self) -> bool:
        return self.exponent > 0.5

    def __call__(self, k: int) -> float:
        return step_size(self, k)


def step_size(schedule: StepSchedule, k: int) -> float:
    if k < 1:
        raise ValueError("step index starts at 1")
    return schedule.scale / k ** schedule.exponent


@dataclass(frozen=True)
class GainConfig:
    beta: float
    mode: str = "private"

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if self.mode not in ("private", "plain"):
            raise ValueError(f"unknown gain mode {self.mode!r}")


@dataclass(frozen=True)
class RateConditions:
    """Analysis constants for the gain thresholds of the rate results.

    f_lower: lower bound of the noise density; delta_phi: excitation level;
    h: excitation horizon; M: regressor norm bound; eta: radius of the
    constraint set.
    """

    f_lower: float
    delta_phi: float
    h: int
    M: float
    eta: float

    def __post_init__(self):
        for name in ("f_lower", "delta_phi", "M", "eta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.h < 1:
            raise ValueError("h must be >= 1")


@dataclass
class EstimatorState:
    theta_hat: np.ndarray
    k: int = 1


@dataclass
class TrialTrajectory:
    """Squared estimation errors ``||theta_hat_k - theta||^2`` on a grid of k.

    ``ks[0] == 1`` is the initial estimate; after ``K`` steps the last entry
    is ``k = K + 1``.
    """

    ks: np.ndarray
    err_sq: np.ndarray
    seed: int
    mode: str
    final_estimate: np.ndarray
    wall_time: float = 0.0
    estimates: np.ndarray | None = None

    @property
    def final_err_sq(self) -> float:
        return float(self.err_sq[-1])

    def rows(self):
        return zip(self.ks.tolist(), self.err_sq.tolist())


def innovation_private(s, gain: GainConfig, params: ChannelParams, f0: float):
    """``beta (1-(p+q)) ((1-(p+q)) F(0) + q - s)``."""
    a = params.attenuation
    return gain.beta * a * (a * f0 + params.q - np.asarray(s, dtype=float))


def innovation_plain(s, gain: GainConfig, params: ChannelParams):
    """No-noise innovation ``beta (1-(p+q)) (q - s)``."""
    a = params.attenuation
    return gain.beta * a * (params.q - np.asarray(s, dtype=float))


def _advance(theta_hat, phi, s_tilde, b_k: float, omega: ConstraintSet):
    step = (b_k * np.asarray(s_tilde, dtype=float))[..., None] * phi
    return project(omega, theta_hat + step)


def update(state: EstimatorState, phi, s_tilde: float, b_k: float, omega: ConstraintSet) -> EstimatorState:
    theta_hat = _advance(np.asarray(state.theta_hat, dtype=float), np.asarray(phi, dtype=float),
                         s_tilde, b_k, omega)
    return EstimatorState(theta_hat=theta_hat, k=state.k + 1)


@dataclass(frozen=True)
class GainReport:
    mode: str
    beta: float
    threshold: float
    satisfied: bool

    def to_dict(self) -> dict:
        return {"mode": self.mode, "beta": self.beta, "threshold": self.threshold,
                "satisfied": self.satisfied}


def check_gain_condition(gain: GainConfig, params: ChannelParams, rc: RateConditions) -> GainReport:
    """Gain threshold for the O(1/k) mean-square rate; strict inequality.

    private: ``1 / (2 (1-p-q)^2 f_lower delta_phi)``
    plain:   ``eta M / (2 delta_phi (1-p-q)^2)``
    """
    a2 = params.attenuation ** 2
    if a2 == 0:
        threshold = math.inf
    elif gain.mode == "private":
        threshold = 1.0 / (2.0 * a2 * rc.f_lower * rc.delta_phi)
    else:
        threshold = rc.eta * rc.M / (2.0 * rc.delta_phi * a2)
    return GainReport(gain.mode, gain.beta, threshold, gain.beta > threshold)


def log_grid(last: int, growth: float = 1.1) -> np.ndarray:
    """``{ceil(growth**j)} ∪ {last}`` restricted to ``[1, last]``."""
    if last < 1:
        raise ValueError("grid needs last >= 1")
    pts = {1, int(last)}
    j = 0
    while True:
        k = math.ceil(growth ** j)
        if k > last:
            break
        pts.add(k)
        j += 1
    return np.array(sorted(pts), dtype=np.int64)


def recording_grid(config: "ExperimentConfig") -> np.ndarray:
    last = config.algorithm.iterations + 1
    if config.algorithm.log_every_step:
        return np.arange(1, last + 1, dtype=np.int64)
    return log_grid(last, config.algorithm.log_growth)


def simulate_trials(config: "ExperimentConfig", seeds: Sequence[int],
                    record_estimates: bool = False) -> list[TrialTrajectory]:
    """Run one trial per seed, all in lockstep."""
    t0 = time.perf_counter()
    seeds = [int(s) for s in seeds]
    T = len(seeds)
    d = config.dim
    K = config.algorithm.iterations
    omega = config.constraint
    theta = np.asarray(config.theta, dtype=float)
    noise = config.noise_model()
    params = config.channel
    gain = config.gain()
    schedule = config.schedule()
    plain = gain.mode == "plain"
    f0 = noise.cdf_at_zero

    streams = [agent_streams(s, 0) for s in seeds]
    gens = [RegressorGenerator(config.regressor, st.regressor) for st in streams]

    theta_hat = np.tile(config.initial_estimate(), (T, 1))
    grid = recording_grid(config)
    rec_err = np.empty((T, len(grid)))
    rec_est = np.empty((T, len(grid), d)) if record_estimates else None
    gi = 0

    def record(k, est):
        nonlocal gi
        if gi < len(grid) and grid[gi] == k:
            rec_err[:, gi] = sqnorm(est - theta)
            if rec_est is not None:
                rec_est[:, gi] = est
            gi += 1

    record(1, theta_hat)
    k = 1
    while k <= K:
        n = min(BLOCK, K - k + 1)
        phis = np.stack([g.block(n) for g in gens])
        if plain:
            ws = np.zeros((T, n))
        else:
            ws = np.stack([noise.sigma * st.noise.standard_normal(n) for st in streams])
        us = np.stack([st.attack.random(n) for st in streams])
        for j in range(n):
            phi = phis[:, j]
            y_private = rowdot(phi, theta) + ws[:, j]
            s0 = binary_quantize(y_private, rowdot(phi, theta_hat))
            s = tamper_with_uniform(s0, us[:, j], params)
            if plain:
                s_tilde = innovation_plain(s, gain, params)
            else:
                s_tilde = innovation_private(s, gain, params, f0)
            theta_hat = _advance(theta_hat, phi, s_tilde, schedule(k), omega)
            k += 1
            record(k, theta_hat)

    wall = time.perf_counter() - t0
    out = []
    for t in range(T):
        out.append(TrialTrajectory(
            ks=grid.copy(), err_sq=rec_err[t].copy(), seed=seeds[t], mode=gain.mode,
            final_estimate=theta_hat[t].copy(), wall_time=wall / max(T, 1),
            estimates=None if rec_est is None else rec_est[t].copy(),
        ))
    return out


def run_estimator(config: "ExperimentConfig", seed: int, record_estimates: bool = False) -> TrialTrajectory:
    """Single seeded trial of the single-center estimator."""
    config.validate_for("identify")
    return simulate_trials(config, [seed], record_estimates=record_estimates)[0]
