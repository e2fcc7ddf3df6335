"""Reproducible random streams for the simulation harness.

Every (master_seed, radio_id, scenario_id, rep) tuple owns two independent
streams, one for the spectrum environment and one for the access policy.
Streams are Philox4x64 counter-based generators keyed by a splitmix64 hash
chain, so any run is reproducible regardless of execution order, thread
count, or batching, and the key derivation is simple enough to replicate
outside this codebase:

    k0 = fold(master_seed, radio_id, scenario_id, rep, tag)
    k1 = splitmix64(k0 XOR 0x9E3779B97F4A7C15)

where fold() starts from a fixed constant and applies
``h = splitmix64(h XOR field)`` per field, tag 0 is the environment stream
and tag 1 the policy stream.  All consumers draw float64 uniforms in [0, 1)
only; one 64-bit Philox word per uniform, arrays filled row-major.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_FOLD_INIT = 0x243F6A8885A308D3  # first 64 fractional bits of pi

ENV_STREAM = 0
POLICY_STREAM = 1


def splitmix64(x: int) -> int:
    """One splitmix64 output step on a 64-bit state."""
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def hash64(*fields: int) -> int:
    """Collapse integer fields into one 64-bit key, order-sensitive."""
    h = _FOLD_INIT
    for f in fields:
        h = splitmix64(h ^ (int(f) & _MASK64))
    return h


def stream(master_seed: int, radio_id: int, scenario_id: int, rep: int,
           tag: int) -> np.random.Generator:
    """Philox generator for one (radio, scenario, rep) stream."""
    k0 = hash64(master_seed, radio_id, scenario_id, rep, tag)
    k1 = splitmix64(k0 ^ _GOLDEN)
    return np.random.Generator(np.random.Philox(key=np.array([k0, k1], dtype=np.uint64)))


@dataclass
class Streams:
    """The environment/policy stream pair for one simulated run."""

    env: np.random.Generator
    policy: np.random.Generator


def make_streams(master_seed: int, radio_id: int, scenario_id: int,
                 rep: int) -> Streams:
    return Streams(
        env=stream(master_seed, radio_id, scenario_id, rep, ENV_STREAM),
        policy=stream(master_seed, radio_id, scenario_id, rep, POLICY_STREAM),
    )
