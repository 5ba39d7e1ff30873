"""Ranking via a ring of traps.

The n states are grouped into m traps arranged in a cycle.  A trap is a gate
state (position b=0) plus a chain of inner states (positions b=1..top).  Two
rule families, both firing only on doubled states:

* inner: two agents on inner state b push the responder down to b-1;
* gate: two agents on a gate send the initiator to the trap's top inner
  state and the responder to the next trap's gate.

For n = m(m+1) every trap has m inner states.  Other populations keep
m = max {m : m(m+1) <= n} and distribute the remaining states round-robin
from trap 0 as additional inner states, so traps may have different tops;
the gate rule always targets the receiving trap's own top.

State identifiers are assigned trap by trap, gate first:
``state_id(a, b) = offset(a) + b``.  The text encoding is ``a:b`` with a
layout header line ``ring m=<m> sizes=<comma-separated trap sizes>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

import numpy as np

from ..engine import Configuration
from ..protocol import Protocol


@dataclass(frozen=True)
class RingLayout:
    """State-space layout: trap sizes (gate included) and id offsets."""

    m: int
    trap_sizes: tuple[int, ...]
    offsets: tuple[int, ...]
    n: int

    def state_id(self, a: int, b: int) -> int:
        if not 0 <= a < self.m:
            raise ValueError(f"trap {a} out of range [0, {self.m})")
        if not 0 <= b < self.trap_sizes[a]:
            raise ValueError(f"position {b} out of range for trap {a}")
        return self.offsets[a] + b

    def trap_pos(self, state: int) -> tuple[int, int]:
        if not 0 <= state < self.n:
            raise ValueError(f"state {state} out of range [0, {self.n})")
        a = int(np.searchsorted(self.offsets, state, side="right")) - 1
        return a, state - self.offsets[a]

    def top(self, a: int) -> int:
        return self.trap_sizes[a] - 1


def build_ring(n: int) -> RingLayout:
    """Layout for population n: largest exact ring, remainder scattered."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    m = (isqrt(4 * n + 1) - 1) // 2
    remainder = n - m * (m + 1)
    sizes = [m + 1 + remainder // m + (1 if a < remainder % m else 0) for a in range(m)]
    offsets = np.cumsum([0] + sizes[:-1]).tolist()
    return RingLayout(m=m, trap_sizes=tuple(sizes), offsets=tuple(offsets), n=n)


def delta(s1: int, s2: int, layout: RingLayout) -> tuple[int, int]:
    """Transition function over ring state identifiers."""
    if not (0 <= s1 < layout.n and 0 <= s2 < layout.n):
        raise ValueError(f"states ({s1}, {s2}) out of range for n={layout.n}")
    if s1 != s2:
        return s1, s2
    a, b = layout.trap_pos(s1)
    if b > 0:
        return s1, layout.state_id(a, b - 1)
    return (
        layout.state_id(a, layout.top(a)),
        layout.state_id((a + 1) % layout.m, 0),
    )


@dataclass(frozen=True)
class TrapStatus:
    """Occupancy summary for one trap.

    ``gaps`` counts unoccupied inner states; ``surplus`` is occupants beyond
    one agent per trap state, floored at 0.  ``saturated`` means no inner
    gap; ``full`` additionally requires at least one agent per state.
    ``almost_stabilised`` is exactly one agent per inner state with an
    empty gate; ``fully_stabilised`` is exactly one agent everywhere.
    """

    trap: int
    occupants: int
    gaps: int
    surplus: int
    saturated: bool
    full: bool
    almost_stabilised: bool
    fully_stabilised: bool


def _counts_of(config) -> np.ndarray:
    return config.counts if isinstance(config, Configuration) else np.asarray(config)


def trap_status(config, layout: RingLayout, a: int) -> TrapStatus:
    """Status of trap a in a Configuration or raw per-state count vector."""
    size = layout.trap_sizes[a]
    lo = layout.offsets[a]
    counts = _counts_of(config)[lo : lo + size]
    occupants = int(counts.sum())
    gaps = int(np.count_nonzero(counts[1:] == 0))
    saturated = gaps == 0
    return TrapStatus(
        trap=a,
        occupants=occupants,
        gaps=gaps,
        surplus=max(0, occupants - size),
        saturated=saturated,
        full=saturated and occupants >= size,
        almost_stabilised=bool(counts[0] == 0 and np.all(counts[1:] == 1)),
        fully_stabilised=bool(np.all(counts == 1)),
    )


def is_tidy(config, layout: RingLayout) -> bool:
    """True iff, per trap, every overloaded inner state sits above every gap."""
    counts = _counts_of(config)
    for a in range(layout.m):
        lo = layout.offsets[a]
        inner = counts[lo + 1 : lo + layout.trap_sizes[a]]
        gap_idx = np.flatnonzero(inner == 0)
        over_idx = np.flatnonzero(inner >= 2)
        if gap_idx.size and over_idx.size and over_idx.min() < gap_idx.max():
            return False
    return True


def make_ring(n: int) -> Protocol:
    layout = build_ring(n)

    def _delta(s1: int, s2: int) -> tuple[int, int]:
        return delta(s1, s2, layout)

    def _encode(state: int) -> str:
        a, b = layout.trap_pos(state)
        return f"{a}:{b}"

    def _decode(token: str) -> int:
        a, b = token.split(":")
        return layout.state_id(int(a), int(b))

    return Protocol(
        name="ring",
        num_ranks=n,
        num_extra=0,
        population=n,
        delta=_delta,
        layout=layout,
        encode_state=_encode,
        decode_state=_decode,
        header=f"ring m={layout.m} sizes={','.join(map(str, layout.trap_sizes))}",
    )
