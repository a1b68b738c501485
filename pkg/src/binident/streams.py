"""Seed derivation and per-trial random streams.

Every trial ``t`` of a run with base seed ``b`` gets the 64-bit seed
``SeedSequence([b, t]).generate_state(1, uint64)[0]``.  Agent ``i`` of that
trial owns ``SeedSequence(seed, spawn_key=(i,))``, split into three
independent PCG64 streams: regressor inputs, privacy noise, attack
uniforms.  The single-center estimator uses agent 0, so a one-node network
sees exactly the same draws.  SeedSequence hashing is platform independent,
and adding agents or trials never perturbs anyone else's draws.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

RNG_METADATA = {
    "bit_generator": "PCG64",
    "seeding": "numpy.random.SeedSequence",
    "numpy_version": np.__version__,
}


class AgentStreams(NamedTuple):
    regressor: np.random.Generator
    noise: np.random.Generator
    attack: np.random.Generator


def derive_trial_seed(base_seed: int, trial: int) -> int:
    ss = np.random.SeedSequence([int(base_seed), int(trial)])
    return int(ss.generate_state(1, np.uint64)[0])


def agent_streams(seed: int, agent: int = 0) -> AgentStreams:
    root = np.random.SeedSequence(int(seed), spawn_key=(int(agent),))
    children = root.spawn(3)
    return AgentStreams(*(np.random.Generator(np.random.PCG64(c)) for c in children))
