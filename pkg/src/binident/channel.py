"""Binary sensor with moving threshold and the bit-flipping attack channel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .privacy import NoiseModel, cdf

# p + q closer to 1 than this counts as the non-identifiable channel
IDENTIFIABILITY_TOL = 1e-12


@dataclass(frozen=True)
class ChannelParams:
    """Attack probabilities: ``p`` flips 1 -> 0, ``q`` flips 0 -> 1."""

    p: float
    q: float

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def attenuation(self) -> float:
        """``1 - (p + q)``; the factor by which the channel scales the signal."""
        return 1.0 - (self.p + self.q)

    @property
    def identifiable(self) -> bool:
        return abs(self.attenuation) > IDENTIFIABILITY_TOL


def binary_quantize(y_private, threshold):
    """1 where the private output is at or below the threshold, else 0."""
    out = (np.asarray(y_private) <= np.asarray(threshold)).astype(np.int8)
    return int(out) if out.ndim == 0 else out


def tamper_with_uniform(bits, u, params: ChannelParams):
    """Apply the attack using pre-drawn uniforms ``u`` in [0, 1).

    A 1 becomes 0 when ``u < p``; a 0 becomes 1 when ``u < q``.  One uniform
    is consumed per bit whatever its value, so stream usage never depends on
    the data.
    """
    bits = np.asarray(bits).astype(bool)
    u = np.asarray(u, dtype=float)
    out = np.where(bits, u >= params.p, u < params.q).astype(np.int8)
    return int(out) if out.ndim == 0 else out


def tamper(bit, params: ChannelParams, rng: np.random.Generator):
    size = None if np.ndim(bit) == 0 else np.shape(bit)
    return tamper_with_uniform(bit, rng.random(size), params)


def channel_law(params: ChannelParams, noise: NoiseModel, gap):
    """Mean of the received bit given ``gap = phi.theta_hat - phi.theta``.

    ``(1 - (p + q)) F(gap) + q``.  Defined for any ``p, q`` including the
    non-identifiable ``p + q = 1`` where it collapses to ``q``.
    """
    return params.attenuation * cdf(noise, gap) + params.q
