"""Seeded Monte Carlo runs, pointwise aggregation and log-log rate fits."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributed import DistributedRun, simulate_network_trials
from .errors import FitError
from .estimator import TrialTrajectory, simulate_trials
from .streams import derive_trial_seed

__all__ = [
    "AggregateCurve", "NetworkAggregate", "RateFit", "TrialTrajectory",
    "aggregate", "fit_rate", "monte_carlo", "monte_carlo_distributed", "trial_seeds",
]


@dataclass
class AggregateCurve:
    ks: np.ndarray
    mean_err_sq: np.ndarray
    std_err_sq: np.ndarray
    n_trials: int
    final_err_sq: np.ndarray  # one entry per trial

    def rows(self):
        return zip(self.ks.tolist(), self.mean_err_sq.tolist(), self.std_err_sq.tolist())

    def at(self, k: int) -> float:
        """Mean error at the largest grid point not beyond ``k``."""
        idx = np.searchsorted(self.ks, k, side="right") - 1
        if idx < 0:
            raise KeyError(k)
        return float(self.mean_err_sq[idx])


@dataclass
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    k_lo: int
    k_hi: int
    n_points: int

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared,
                "window": [self.k_lo, self.k_hi], "n_points": self.n_points}


def trial_seeds(base_seed: int, n_trials: int) -> list[int]:
    return [derive_trial_seed(base_seed, t) for t in range(n_trials)]


def aggregate(trajectories: list[TrialTrajectory]) -> AggregateCurve:
    """Pointwise mean and (population) std over trials, in trial order."""
    if not trajectories:
        raise ValueError("need at least one trajectory")
    ks = trajectories[0].ks
    for tr in trajectories[1:]:
        if not np.array_equal(tr.ks, ks):
            raise ValueError("trajectories are on different grids")
    errs = np.stack([tr.err_sq for tr in trajectories])
    return AggregateCurve(ks=ks.copy(), mean_err_sq=errs.mean(axis=0), std_err_sq=errs.std(axis=0),
                          n_trials=len(trajectories), final_err_sq=errs[:, -1].copy())


def _chunks(items, jobs):
    size = -(-len(items) // jobs)
    return [items[i:i + size] for i in range(0, len(items), size)]


def _run_batches(fn, config, seeds, jobs):
    if jobs <= 1 or len(seeds) <= 1:
        return fn(config, seeds)
    parts = _chunks(seeds, jobs)
    with ProcessPoolExecutor(max_workers=len(parts)) as pool:
        results = list(pool.map(fn, [config] * len(parts), parts))
    return [r for part in results for r in part]


def run_trials(config, n_trials: int, base_seed: int, jobs: int = 1) -> list[TrialTrajectory]:
    config.validate_for("identify")
    return _run_batches(simulate_trials, config, trial_seeds(base_seed, n_trials), jobs)


def monte_carlo(config, n_trials: int | None = None, base_seed: int | None = None,
                jobs: int | None = None) -> AggregateCurve:
    """Average ``n_trials`` single-center trials.

    Trial ``t`` uses seed ``derive_trial_seed(base_seed, t)``.  The aggregate
    is bit-identical for any ``jobs`` value.
    """
    h = config.harness
    n_trials = h.trials if n_trials is None else n_trials
    base_seed = h.base_seed if base_seed is None else base_seed
    jobs = h.jobs if jobs is None else jobs
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    return aggregate(run_trials(config, n_trials, base_seed, jobs))


@dataclass
class NetworkAggregate:
    agents: list[AggregateCurve]
    network_mean: AggregateCurve
    disagreement_mean: np.ndarray
    runs: list[DistributedRun]

    @property
    def ks(self) -> np.ndarray:
        return self.network_mean.ks


def run_network_trials(config, n_trials: int, base_seed: int, jobs: int = 1) -> list[DistributedRun]:
    config.validate_for("distributed")
    return _run_batches(simulate_network_trials, config, trial_seeds(base_seed, n_trials), jobs)


def monte_carlo_distributed(config, n_trials: int | None = None, base_seed: int | None = None,
                            jobs: int | None = None) -> NetworkAggregate:
    h = config.harness
    n_trials = h.trials if n_trials is None else n_trials
    base_seed = h.base_seed if base_seed is None else base_seed
    jobs = h.jobs if jobs is None else jobs
    runs = run_network_trials(config, n_trials, base_seed, jobs)
    n = len(runs[0].agents)
    agents = [aggregate([r.agents[i] for r in runs]) for i in range(n)]
    net_trajs = [TrialTrajectory(ks=r.ks, err_sq=r.network_mean, seed=r.seed, mode="network",
                                 final_estimate=np.empty(0)) for r in runs]
    dis = np.stack([r.disagreement for r in runs]).mean(axis=0)
    return NetworkAggregate(agents=agents, network_mean=aggregate(net_trajs), disagreement_mean=dis, runs=runs)


def fit_rate(curve: AggregateCurve, k_lo: int, k_hi: int, min_points: int = 10) -> RateFit:
    """Least-squares slope of ``log mean_err_sq`` against ``log k`` on ``[k_lo, k_hi]``."""
    if not k_lo < k_hi:
        raise FitError(f"empty fit window [{k_lo}, {k_hi}]")
    ks = np.asarray(curve.ks, dtype=float)
    ys = np.asarray(curve.mean_err_sq, dtype=float)
    mask = (ks >= k_lo) & (ks <= k_hi)
    if mask.sum() < min_points:
        raise FitError(f"fit window [{k_lo}, {k_hi}] holds {int(mask.sum())} grid points, need {min_points}")
    if np.any(ys[mask] <= 0):
        raise FitError("fit window contains zero mean error; log-log fit undefined")
    x = np.log(ks[mask])
    y = np.log(ys[mask])
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    sst = float(np.sum((y - ym) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / sst if sst > 0 else 1.0
    return RateFit(slope=slope, intercept=intercept, r_squared=min(max(r2, 0.0), 1.0),
                   k_lo=int(k_lo), k_hi=int(k_hi), n_points=int(mask.sum()))
