"""Simulation engine: configurations, random scheduling, silence detection.

The engine executes population-protocol runs under the uniform random
scheduler: each interaction picks an ordered pair of distinct agents
(initiator, responder) uniformly from the n(n-1) possibilities and applies
the protocol's transition function.  Parallel time is interactions divided
by the population size.

Determinism contract: identical (seed, protocol, initial configuration,
budget) produce identical RunStats and an identical final configuration,
byte for byte.  All stochastic choices flow through one xoshiro256++ stream
(see ``rng``), and silence checks consume no draws.

A configuration is silent when no realizable ordered pair of agents would
change state.  ``run_until_silent`` detects silence with cheap incremental
counters plus a full occupied-pair scan on a configurable cadence (default:
every n interactions, and immediately after any window of n interactions
without a state change); ``is_silent`` is the standalone full check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernel
from .protocol import Protocol, read_config_file
from .rng import Rng


@dataclass
class Configuration:
    """Population state: one entry per agent plus per-state occupancy counts.

    ``agents[i]`` is agent i's state identifier; ``counts[s]`` is the number
    of agents in state s and always sums to the population size n.
    """

    agents: np.ndarray
    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.agents.shape[0])

    @property
    def num_states(self) -> int:
        return int(self.counts.shape[0])

    @classmethod
    def from_agents(cls, agents, num_states: int) -> "Configuration":
        arr = np.asarray(agents, dtype=np.int32)
        if arr.ndim != 1 or arr.shape[0] == 0:
            raise ValueError("agents must be a non-empty 1-d array")
        if arr.min() < 0 or arr.max() >= num_states:
            raise ValueError(
                f"agent states must lie in [0, {num_states}), "
                f"got range [{arr.min()}, {arr.max()}]"
            )
        counts = np.bincount(arr, minlength=num_states).astype(np.int64)
        return cls(agents=arr.copy(), counts=counts)

    @classmethod
    def from_counts(cls, counts) -> "Configuration":
        """Build from occupancy counts; agents are laid out in state order."""
        c = np.asarray(counts, dtype=np.int64)
        if c.ndim != 1 or c.min() < 0 or c.sum() == 0:
            raise ValueError("counts must be non-negative with a positive sum")
        agents = np.repeat(np.arange(c.shape[0], dtype=np.int32), c)
        return cls(agents=agents, counts=c.copy())

    def copy(self) -> "Configuration":
        return Configuration(self.agents.copy(), self.counts.copy())

    def occupied(self) -> np.ndarray:
        return np.flatnonzero(self.counts)

    def validate(self) -> None:
        """Assert the counts/agents invariant; raises on corruption."""
        expect = np.bincount(self.agents, minlength=self.num_states).astype(np.int64)
        if expect.shape[0] > self.num_states or not np.array_equal(
            expect[: self.num_states], self.counts
        ):
            raise AssertionError("configuration counts out of sync with agents")


@dataclass(frozen=True)
class TransitionResult:
    """Outcome of a single interaction."""

    initiator_after: int
    responder_after: int
    changed: bool


@dataclass(frozen=True)
class RunStats:
    """Summary of a run.

    ``interactions_at_last_change`` is the silence measure: interactions
    past it are identity by definition.  ``parallel_time`` is that count
    divided by the population size.
    """

    interactions_total: int
    interactions_at_last_change: int
    parallel_time: float
    silent: bool


# ---------------------------------------------------------------------------
# Initial-configuration descriptors


@dataclass(frozen=True)
class Uniform:
    """Every agent starts in the given state."""

    state: int


@dataclass(frozen=True)
class KDistant:
    """Exactly k rank states unoccupied; the k displaced agents land
    uniformly at random on the occupied rank states."""

    k: int


@dataclass(frozen=True)
class RandomInit:
    """Each agent independently uniform over the full state space,
    extra states included."""


@dataclass(frozen=True)
class Explicit:
    """Caller-provided list of agent states."""

    states: tuple[int, ...]


InitSpec = Union[Uniform, KDistant, RandomInit, Explicit]


def describe_init(spec: InitSpec) -> str:
    """Canonical descriptor string, as recorded in trial CSVs."""
    if isinstance(spec, Uniform):
        return f"uniform:{spec.state}"
    if isinstance(spec, KDistant):
        return f"kdist:{spec.k}"
    if isinstance(spec, RandomInit):
        return "random"
    if isinstance(spec, Explicit):
        return "explicit"
    raise TypeError(f"not an init spec: {spec!r}")


def parse_init(text: str, protocol: Protocol) -> InitSpec:
    """Parse a descriptor string: uniform:<s> | kdist:<k> | random | file:<path>.

    ``uniform:`` accepts either a numeric state identifier or the protocol's
    own state encoding (for example ``uniform:2:0`` for a trap gate).
    """
    if text == "random":
        return RandomInit()
    if text.startswith("uniform:"):
        token = text[len("uniform:"):]
        try:
            state = int(token)
        except ValueError:
            state = protocol.decode(token)
        return Uniform(state)
    if text.startswith("kdist:"):
        return KDistant(int(text[len("kdist:"):]))
    if text.startswith("file:"):
        states = read_config_file(text[len("file:"):], protocol)
        return Explicit(tuple(states))
    raise ValueError(f"unrecognised init descriptor: {text!r}")


def gen_initial(spec: InitSpec, protocol: Protocol, rng: Rng) -> Configuration:
    """Create an initial configuration for the protocol's population.

    Draw order is fixed per descriptor so that a given seed always yields
    the same configuration: KDistant first samples the k unoccupied ranks
    (partial Fisher-Yates), then places each displaced agent; RandomInit
    draws one state per agent in index order.
    """
    n = protocol.population
    ns = protocol.num_states
    if isinstance(spec, Uniform):
        if not 0 <= spec.state < ns:
            raise ValueError(f"state {spec.state} out of range [0, {ns})")
        return Configuration.from_agents(np.full(n, spec.state, dtype=np.int32), ns)
    if isinstance(spec, KDistant):
        if protocol.population != protocol.num_ranks:
            raise ValueError(
                "k-distant initialisation needs population == rank count, "
                f"got {protocol.population} agents over {protocol.num_ranks} ranks"
            )
        if not 0 <= spec.k < n:
            raise ValueError(f"need 0 <= k < n, got k={spec.k}, n={n}")
        empty = set(rng.sample_distinct(spec.k, protocol.num_ranks).tolist())
        occupied = np.array(
            [s for s in range(protocol.num_ranks) if s not in empty], dtype=np.int32
        )
        displaced = np.array(
            [occupied[rng.randbelow(len(occupied))] for _ in range(spec.k)],
            dtype=np.int32,
        )
        return Configuration.from_agents(np.concatenate([occupied, displaced]), ns)
    if isinstance(spec, RandomInit):
        agents = np.array([rng.randbelow(ns) for _ in range(n)], dtype=np.int32)
        return Configuration.from_agents(agents, ns)
    if isinstance(spec, Explicit):
        if len(spec.states) != n:
            raise ValueError(
                f"explicit states have length {len(spec.states)}, expected {n}"
            )
        return Configuration.from_agents(
            np.array(spec.states, dtype=np.int32), ns
        )
    raise TypeError(f"not an init spec: {spec!r}")


# ---------------------------------------------------------------------------
# Execution


def sample_pair(rng: Rng, n: int) -> tuple[int, int]:
    """Ordered (initiator, responder) pair, uniform over n(n-1) choices."""
    return rng.sample_pair(n)


def step(config: Configuration, protocol: Protocol, rng: Rng) -> TransitionResult:
    """Run one interaction, mutating the configuration in place."""
    i, j = sample_pair(rng, config.n)
    s1 = int(config.agents[i])
    s2 = int(config.agents[j])
    t1, t2 = protocol.delta(s1, s2)
    changed = (t1 != s1) or (t2 != s2)
    if changed:
        config.counts[s1] -= 1
        config.counts[s2] -= 1
        config.counts[t1] += 1
        config.counts[t2] += 1
        config.agents[i] = t1
        config.agents[j] = t2
    return TransitionResult(t1, t2, changed)


def is_silent(config: Configuration, protocol: Protocol) -> bool:
    """Full check: no realizable ordered pair changes state."""
    t = protocol.tables()
    return bool(
        _kernel.silent_scan(
            config.counts, t.diag1, t.diag2, t.diag_active,
            t.xrow1, t.xrow2, t.xcol1, t.xcol2, protocol.num_ranks,
        )
    )


def run_until_silent(
    config: Configuration,
    protocol: Protocol,
    rng: Rng,
    max_interactions: int,
    cadence: int | None = None,
) -> RunStats:
    """Run until silence is detected or the interaction budget is spent.

    Mutates the configuration and the rng state in place and returns the
    stats.  ``silent`` reports the truth at exit (a final full scan runs on
    budget exhaustion as well).  A population of one, or a configuration
    that is already silent, returns immediately with zero interactions.
    """
    if max_interactions <= 0:
        raise ValueError(f"max_interactions must be positive, got {max_interactions}")
    if config.n < 2 or is_silent(config, protocol):
        return RunStats(0, 0, 0.0, True)
    if cadence is None:
        cadence = config.n
    if cadence < 1:
        raise ValueError(f"cadence must be >= 1, got {cadence}")
    t = protocol.tables()
    total, last_change, silent = _kernel.run_kernel(
        config.agents, config.counts, t.diag1, t.diag2, t.diag_active,
        t.xrow1, t.xrow2, t.xcol1, t.xcol2, protocol.num_ranks,
        rng.state, np.int64(max_interactions), np.int64(cadence),
    )
    return RunStats(
        interactions_total=int(total),
        interactions_at_last_change=int(last_change),
        parallel_time=int(last_change) / config.n,
        silent=bool(silent),
    )
