"""True linear system, regressor streams and the constraint set.

All vector helpers accept a trailing axis of length ``d`` and broadcast over
leading axes, so the same code serves a single estimate and a batch of
trials.  Inner products are accumulated coordinate by coordinate in a fixed
order; this keeps results bit-identical no matter how many rows are in the
batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import Violation, ValidationError


def rowdot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Inner product over the last axis, summed left to right."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    acc = x[..., 0] * y[..., 0]
    for j in range(1, x.shape[-1]):
        acc = acc + x[..., j] * y[..., j]
    return acc


def sqnorm(x: np.ndarray) -> np.ndarray:
    return rowdot(x, x)


def system_output(phi, theta) -> float:
    """Noise-free output ``phi . theta`` of the linear regression model."""
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if phi.shape != theta.shape or phi.ndim != 1:
        raise ValidationError(
            [Violation("dimension_mismatch", "linear model",
                       f"regressor shape {phi.shape} does not match parameter shape {theta.shape}")]
        )
    return float(rowdot(phi, theta))


# ---------------------------------------------------------------------------
# Constraint set
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintSet:
    """Axis-aligned symmetric box or Euclidean ball.

    The box is the closed set ``{x : |x_i| <= half_widths[i]}``; the ball is
    ``{x : ||x - center|| <= radius}``.
    """

    kind: str
    half_widths: tuple[float, ...] | None = None
    center: tuple[float, ...] | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.kind == "box":
            if self.half_widths is None or len(self.half_widths) == 0:
                raise ValueError("box needs half_widths")
            if any(not (h > 0 and math.isfinite(h)) for h in self.half_widths):
                raise ValueError("box half-widths must be positive and finite")
        elif self.kind == "ball":
            if self.center is None or self.radius is None:
                raise ValueError("ball needs center and radius")
            if not (self.radius > 0 and math.isfinite(self.radius)):
                raise ValueError("ball radius must be positive and finite")
        else:
            raise ValueError(f"unknown constraint kind {self.kind!r}")

    @classmethod
    def box(cls, half_widths: Sequence[float]) -> "ConstraintSet":
        return cls("box", half_widths=tuple(float(h) for h in half_widths))

    @classmethod
    def ball(cls, center: Sequence[float], radius: float) -> "ConstraintSet":
        return cls("ball", center=tuple(float(c) for c in center), radius=float(radius))

    @property
    def dim(self) -> int:
        return len(self.half_widths) if self.kind == "box" else len(self.center)

    @property
    def eta(self) -> float:
        """Largest norm of any point in the set."""
        if self.kind == "box":
            return math.sqrt(sum(h * h for h in self.half_widths))
        return math.sqrt(sum(c * c for c in self.center)) + self.radius

    @property
    def origin_symmetric(self) -> bool:
        return self.kind == "box" or all(c == 0.0 for c in self.center)

    def contains(self, x, tol: float = 1e-12) -> np.ndarray | bool:
        x = np.asarray(x, dtype=float)
        if self.kind == "box":
            hw = np.asarray(self.half_widths)
            ok = np.all(np.abs(x) <= hw + tol, axis=-1)
        else:
            c = np.asarray(self.center)
            ok = np.sqrt(sqnorm(x - c)) <= self.radius + tol
        return bool(ok) if np.ndim(ok) == 0 else ok

    def project(self, x) -> np.ndarray:
        return project(self, x)

    def to_dict(self) -> dict:
        if self.kind == "box":
            return {"kind": "box", "half_widths": list(self.half_widths)}
        return {"kind": "ball", "center": list(self.center), "radius": self.radius}


def project(omega: ConstraintSet, x) -> np.ndarray:
    """Euclidean projection onto ``omega``.

    Box: per-coordinate clamp.  Ball: radial scaling toward the center, points
    already inside are returned untouched.
    """
    x = np.asarray(x, dtype=float)
    if omega.kind == "box":
        hw = np.asarray(omega.half_widths)
        return np.minimum(np.maximum(x, -hw), hw)
    c = np.asarray(omega.center)
    diff = x - c
    dist = np.sqrt(sqnorm(diff))
    outside = dist > omega.radius
    # dist > radius > 0 wherever the scale is used, so no division by zero
    scale = np.where(outside, omega.radius / np.where(outside, dist, 1.0), 1.0)
    out = np.where(outside[..., None], c + diff * scale[..., None], x)
    # rounding can leave a scaled point an ulp outside, which would break
    # idempotence; shrink the scale until the result is inside
    step = np.finfo(float).eps
    for _ in range(60):
        over = outside & (np.sqrt(sqnorm(out - c)) > omega.radius)
        if not np.any(over):
            break
        scale = np.where(over, scale * (1.0 - step), scale)
        out = np.where(over[..., None], c + diff * scale[..., None], out)
        step *= 2.0
    return out


# ---------------------------------------------------------------------------
# Regressors
# ---------------------------------------------------------------------------

REGRESSOR_MODES = ("gaussian", "uniform", "fixed")


@dataclass(frozen=True)
class RegressorSpec:
    """How the regressor vectors are produced.

    ``gaussian`` and ``uniform`` build a shift register
    ``phi_k = (u_k, u_{k-1}, ..., u_{k-d+1})`` from an i.i.d. scalar input
    stream; ``fixed`` replays ``sequence`` cyclically.
    """

    dim: int
    mode: str = "gaussian"
    variance: float = 2.0
    low: float = -1.0
    high: float = 1.0
    sequence: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        if self.mode not in REGRESSOR_MODES:
            raise ValueError(f"unknown regressor mode {self.mode!r}")
        if self.dim < 1:
            raise ValueError("regressor dimension must be >= 1")
        if self.mode == "gaussian" and not self.variance >= 0:
            raise ValueError("input variance must be >= 0")
        if self.mode == "uniform" and not self.high >= self.low:
            raise ValueError("uniform input needs high >= low")
        if self.mode == "fixed":
            if not self.sequence:
                raise ValueError("fixed regressor mode needs a non-empty sequence")
            if any(len(row) != self.dim for row in self.sequence):
                raise ValueError("every fixed regressor must have length dim")

    def to_dict(self) -> dict:
        if self.mode == "gaussian":
            return {"mode": "gaussian", "variance": self.variance}
        if self.mode == "uniform":
            return {"mode": "uniform", "low": self.low, "high": self.high}
        return {"mode": "fixed", "sequence": [list(r) for r in self.sequence]}


class RegressorGenerator:
    """Stateful single-consumer regressor source bound to one random stream.

    In the shift-register modes the constructor consumes ``dim - 1`` warm-up
    scalars and each regressor afterwards consumes exactly one.  Drawing a
    block of ``n`` regressors is equivalent to ``n`` calls of :meth:`next`.
    """

    def __init__(self, spec: RegressorSpec, rng: np.random.Generator | None = None):
        self.spec = spec
        self.rng = rng
        self._pos = 0
        if spec.mode == "fixed":
            self._seq = np.asarray(spec.sequence, dtype=float)
            self._history = None
        else:
            if rng is None:
                raise ValueError("random regressor modes need a random stream")
            self._history = self._scalars(spec.dim - 1)

    def _scalars(self, n: int) -> np.ndarray:
        spec = self.spec
        if spec.mode == "gaussian":
            return math.sqrt(spec.variance) * self.rng.standard_normal(n)
        return spec.low + (spec.high - spec.low) * self.rng.random(n)

    def block(self, n: int) -> np.ndarray:
        """Next ``n`` regressors as an ``(n, dim)`` array."""
        d = self.spec.dim
        if self.spec.mode == "fixed":
            idx = (self._pos + np.arange(n)) % len(self._seq)
            self._pos += n
            return self._seq[idx].copy()
        fresh = self._scalars(n)
        stream = np.concatenate([self._history, fresh])
        if d > 1:
            self._history = stream[len(stream) - (d - 1):].copy()
        # window j holds u_{j}, ..., u_{j+d-1}; newest first
        return sliding_window_view(stream, d)[:, ::-1].copy()

    def next(self) -> np.ndarray:
        return self.block(1)[0]


def next_regressor(gen: RegressorGenerator) -> np.ndarray:
    return gen.next()
