"""Shared test utilities: independent reference implementations.

Everything here recomputes behaviour from first principles (scalar
transition functions, brute-force pair scans) so that the engine's jitted
fast paths are checked against a second, slower route.
"""

from __future__ import annotations

import numpy as np

from poprank.engine import Configuration, RunStats, run_until_silent
from poprank.protocol import Protocol
from poprank.rng import Rng


def brute_is_silent(config: Configuration, protocol: Protocol) -> bool:
    """Silence by exhaustive scalar-delta scan over occupied ordered pairs."""
    occ = [int(s) for s in np.flatnonzero(config.counts)]
    for s1 in occ:
        for s2 in occ:
            if s1 == s2 and config.counts[s1] < 2:
                continue
            if protocol.delta(s1, s2) != (s1, s2):
                return False
    return True


def reference_run(
    config: Configuration,
    protocol: Protocol,
    rng: Rng,
    max_interactions: int,
    cadence: int | None = None,
) -> RunStats:
    """Pure-Python twin of run_until_silent: same draws, same check points."""
    if config.n < 2 or brute_is_silent(config, protocol):
        return RunStats(0, 0, 0.0, True)
    if cadence is None:
        cadence = config.n
    interactions = 0
    last_change = 0
    silent = False
    while interactions < max_interactions:
        i, j = rng.sample_pair(config.n)
        interactions += 1
        s1 = int(config.agents[i])
        s2 = int(config.agents[j])
        t1, t2 = protocol.delta(s1, s2)
        if (t1, t2) != (s1, s2):
            config.counts[s1] -= 1
            config.counts[s2] -= 1
            config.counts[t1] += 1
            config.counts[t2] += 1
            config.agents[i] = t1
            config.agents[j] = t2
            last_change = interactions
        if interactions % cadence == 0 or interactions - last_change == cadence:
            if brute_is_silent(config, protocol):
                silent = True
                break
    else:
        silent = brute_is_silent(config, protocol)
    return RunStats(interactions, last_change, last_change / config.n, silent)


def run_chunked(config, protocol, rng, chunk, max_chunks, callback=None):
    """Advance in fixed interaction chunks until silence.

    Returns (interactions_at_last_change overall, silent).  ``callback``
    runs on the configuration after every chunk; silence checks consume no
    draws, so the trajectory equals an unchunked run with the same seed.
    """
    consumed = 0
    overall_last_change = 0
    for _ in range(max_chunks):
        stats = run_until_silent(config, protocol, rng, chunk)
        if stats.interactions_at_last_change > 0:
            overall_last_change = consumed + stats.interactions_at_last_change
        consumed += stats.interactions_total
        if callback is not None:
            callback(config)
        if stats.silent:
            return overall_last_change, True
    return overall_last_change, False


def random_config(rng: Rng, protocol: Protocol, population: int | None = None) -> Configuration:
    """Uniform random configuration over the full state space."""
    n = protocol.population if population is None else population
    agents = np.array([rng.randbelow(protocol.num_states) for _ in range(n)], dtype=np.int32)
    return Configuration.from_agents(agents, protocol.num_states)
