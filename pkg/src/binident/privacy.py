"""Gaussian privacy mechanism: tail function, its inverse, sigma calibration."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Q^{-1} bracket; Q(40) underflows far below any usable delta
_QINV_HI = 40.0
_QINV_TOL = 1e-12


def q_function(x):
    """Upper tail of the standard normal, ``P(Z > x)``."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(float(x) / _SQRT2)
    return 0.5 * erfc(np.asarray(x, dtype=float) / _SQRT2)


def q_inverse(p: float, tol: float = _QINV_TOL) -> float:
    """Solve ``q_function(x) = p`` by bisection.

    Values above one half use the reflection ``Q^{-1}(p) = -Q^{-1}(1 - p)``
    so the search always runs on ``[0, 40]`` where ``Q`` is decreasing.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"q_inverse needs 0 < p < 1, got {p}")
    if p > 0.5:
        return -q_inverse(1.0 - p, tol)
    if p == 0.5:
        return 0.0
    lo, hi = 0.0, _QINV_HI
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if q_function(mid) > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    delta: float
    sensitivity: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not 0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 0.5)")
        if not self.sensitivity > 0:
            raise ValueError("sensitivity must be > 0")


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean Gaussian privacy noise.  ``sigma == 0`` means no noise."""

    sigma: float
    distribution: str = "gaussian"

    def __post_init__(self):
        if self.distribution != "gaussian":
            raise ValueError("only Gaussian privacy noise is supported")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be finite and >= 0")

    @property
    def cdf_at_zero(self) -> float:
        # a degenerate point mass at 0 has F(0) = 1, but the no-noise
        # innovation never reads F(0)
        return 0.5 if self.sigma > 0 else 1.0

    def cdf(self, x):
        return cdf(self, x)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if self.sigma == 0:
            raise ValueError("degenerate noise has no density")
        z = x / self.sigma
        out = np.exp(-0.5 * z * z) / (self.sigma * _SQRT2PI)
        return float(out) if out.ndim == 0 else out

    def density_lower_bound(self, radius: float) -> float:
        """``inf_{|x| <= radius} f(x)``; attained at the edge for a Gaussian."""
        return self.density(abs(radius))


def calibrate_sigma(budget: PrivacyBudget) -> NoiseModel:
    """Noise level making the Gaussian mechanism (epsilon, delta)-private.

    ``sigma = (Delta / 2 eps) * (Qinv(delta) + sqrt(Qinv(delta)^2 + 2 eps))``
    """
    z = q_inverse(budget.delta)
    sigma = budget.sensitivity / (2.0 * budget.epsilon) * (z + math.sqrt(z * z + 2.0 * budget.epsilon))
    return NoiseModel(sigma=sigma)


def sample_noise(model: NoiseModel, rng: np.random.Generator, size=None):
    draw = rng.standard_normal(size)
    return model.sigma * draw


def cdf(model: NoiseModel, x):
    """Noise CDF ``F(x)``."""
    if model.sigma == 0:
        out = (np.asarray(x, dtype=float) >= 0).astype(float)
    else:
        out = 0.5 * erfc(-np.asarray(x, dtype=float) / (model.sigma * _SQRT2))
    return float(out) if np.ndim(out) == 0 else out


def _dp_excess(t, sigma: float, shift: float, epsilon: float):
    """``P(y' + w > t) - e^eps P(y + w > t)`` for adjacent outputs ``y' = y + shift``."""
    upper = 0.5 * erfc((t - shift) / (sigma * _SQRT2))
    lower = 0.5 * erfc(t / (sigma * _SQRT2))
    return upper - math.exp(epsilon) * lower


def verify_dp_condition(budget: PrivacyBudget, sigma: float, n_grid: int = 20001) -> float:
    """Slack ``delta - sup_R [P(M(y') in R) - e^eps P(M(y) in R)]``.

    The sup runs over half-lines ``R = (t, inf)`` for a worst-case adjacent
    pair at distance ``Delta``: a dense sweep over ``t`` plus the point where
    the two densities have ratio ``e^eps``, which is the exact maximiser.
    Nonnegative slack means the mechanism meets the budget.
    """
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    eps, shift = budget.epsilon, budget.sensitivity
    span = 12.0 * sigma + abs(shift)
    ts = np.linspace(-span, span + shift, n_grid)
    t_star = 0.5 * shift + sigma * sigma * eps / shift
    ts = np.append(ts, t_star)
    worst = float(np.max(_dp_excess(ts, sigma, shift, eps)))
    worst = max(worst, 0.0)  # R = empty set gives 0
    return budget.delta - worst
