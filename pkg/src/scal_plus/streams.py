"""Seeded random streams.

Every run derives one independent numpy ``Generator`` per role from its master
seed, so the environment and the agent never share draws and a run is fully
determined by its seed.
"""

from __future__ import annotations

import numpy as np

ROLES = {"env": 0, "agent": 1}


def make_stream(seed: int, role: str) -> np.random.Generator:
    """PCG64 generator for ``role`` ("env" or "agent") under master ``seed``."""
    if role not in ROLES:
        raise ValueError(f"unknown stream role {role!r}; expected one of {sorted(ROLES)}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(ROLES[role],)))
