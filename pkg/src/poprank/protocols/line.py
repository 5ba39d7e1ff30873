"""Ranking via lines of traps joined by a constant-degree routing graph.

For m a power of two, the state space is m^2 lines, each a chain of 3m
traps of m+1 states (gate b=0 plus inner states b=1..m), for a total of
n = 3 m^3 (m+1) rank states, plus a single external state X.  A state is a
triple (l, a, b): line l in 1..m^2, trap a in 1..3m (trap 1 is the exit,
trap 3m the entrance), position b.

Rules (doubled states fire, otherwise identity):

* inner: (l,a,b)+(l,a,b) -> (l,a,b)+(l,a,b-1) for b > 0;
* along the line: two agents on gate (l,a,0), a > 1, send the initiator to
  the trap's top inner state and the responder to the previous trap's gate;
* exit: two agents on gate (l,1,0) send the initiator up and the responder
  out to X;
* recycle: X+X keeps the initiator and sends the responder to the entrance
  gate of line 1;
* routing: a rank agent (l,a,b) meeting an X responder sends it to the
  entrance gate of neighbour l_i of line l, where the band index
  i = (a-1) // m selects one of line l's three neighbours in the routing
  graph (neighbours are listed in ascending order).

Populations strictly between exact sizes are supported by scattering extra
inner states round-robin over the traps (at most two per trap); rules then
use each trap's own top index.

Text encoding: ``l:a:b`` for rank states, ``X`` for the external state,
with layout header line ``line m=<m>``.

The module also provides the isolated single-line variant (arrivals
disabled, X an absorbing sink), the silent-outcome recursion that predicts
the unique silent configuration of a line from its per-trap occupancy
vectors, and occupancy diagnostics (line vectors, indicated lines).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..engine import Configuration
from ..protocol import Protocol
from ..rng import Rng


# ---------------------------------------------------------------------------
# Routing graph


@dataclass(frozen=True)
class RoutingGraph:
    """Cubic graph on the lines; adjacency[l-1] is line l's sorted triple."""

    m: int
    adjacency: tuple[tuple[int, int, int], ...]

    @property
    def num_lines(self) -> int:
        return len(self.adjacency)

    def neighbours(self, l: int) -> tuple[int, int, int]:
        if not 1 <= l <= self.num_lines:
            raise ValueError(f"line {l} out of range [1, {self.num_lines}]")
        return self.adjacency[l - 1]


def _require_power_of_two(m: int) -> None:
    if m < 2 or (m & (m - 1)) != 0:
        raise ValueError(f"m must be a power of two >= 2, got {m}")


def build_routing_graph(m: int) -> RoutingGraph:
    """Cubic graph on m^2 vertices with diameter at most 4*ceil(log2 m).

    Construction for m >= 4: label a perfect binary tree 1..m^2-1 in
    heap order (children of v are 2v, 2v+1), give the leftmost leaf
    L = m^2/2 two children m^2 and m^2+1, merge the root with vertex
    m^2+1 (the root inherits the edge to L), and close a cycle through
    the remaining m^2/2 leaves in left-to-right order.  Every vertex then
    has degree exactly 3.  For m=2 the construction degenerates (parallel
    edges on 4 vertices), so the graph is K4, the unique cubic simple
    graph on 4 vertices.
    """
    _require_power_of_two(m)
    v = m * m
    if m == 2:
        adj = [tuple(sorted(set(range(1, 5)) - {x})) for x in range(1, 5)]
        return RoutingGraph(m=m, adjacency=tuple(adj))

    edges: list[tuple[int, int]] = []
    half = v // 2
    for p in range(1, half):
        edges.append((p, 2 * p))
        edges.append((p, 2 * p + 1))
    leftmost = half
    edges.append((leftmost, v))  # expansion child that survives the merge
    edges.append((1, leftmost))  # root merged with the other child
    cycle = [v] + list(range(half + 1, v))
    for idx in range(len(cycle)):
        edges.append((cycle[idx], cycle[(idx + 1) % len(cycle)]))

    neigh: list[set[int]] = [set() for _ in range(v + 1)]
    for x, y in edges:
        neigh[x].add(y)
        neigh[y].add(x)
    adjacency = []
    for x in range(1, v + 1):
        if len(neigh[x]) != 3:
            raise AssertionError(f"vertex {x} has degree {len(neigh[x])}, expected 3")
        adjacency.append(tuple(sorted(neigh[x])))
    return RoutingGraph(m=m, adjacency=tuple(adjacency))


# ---------------------------------------------------------------------------
# Layouts


def _scatter_sizes(base: int, traps: int, scatter: int) -> list[int]:
    """Trap sizes after distributing scatter extra inner states round-robin."""
    if scatter < 0 or scatter > 2 * traps:
        raise ValueError(
            f"scatter must lie in [0, {2 * traps}] (at most two per trap), got {scatter}"
        )
    return [base + scatter // traps + (1 if t < scatter % traps else 0) for t in range(traps)]


@dataclass(frozen=True)
class LineLayout:
    """Full-system layout: m^2 lines of 3m traps plus the external state X."""

    m: int
    lines: int
    traps_per_line: int
    trap_sizes: tuple[int, ...]  # flat, index (l-1)*traps_per_line + (a-1)
    offsets: tuple[int, ...]  # flat, same indexing; gate state id of (l, a)
    n: int  # rank states; X has identifier n
    graph: RoutingGraph

    @property
    def x_state(self) -> int:
        return self.n

    def _ti(self, l: int, a: int) -> int:
        if not 1 <= l <= self.lines:
            raise ValueError(f"line {l} out of range [1, {self.lines}]")
        if not 1 <= a <= self.traps_per_line:
            raise ValueError(f"trap {a} out of range [1, {self.traps_per_line}]")
        return (l - 1) * self.traps_per_line + (a - 1)

    def trap_size(self, l: int, a: int) -> int:
        return self.trap_sizes[self._ti(l, a)]

    def top(self, l: int, a: int) -> int:
        return self.trap_size(l, a) - 1

    def state_id(self, l: int, a: int, b: int) -> int:
        ti = self._ti(l, a)
        if not 0 <= b < self.trap_sizes[ti]:
            raise ValueError(f"position {b} out of range for trap ({l},{a})")
        return self.offsets[ti] + b

    def trap_pos(self, state: int) -> tuple[int, int, int]:
        if not 0 <= state < self.n:
            raise ValueError(f"state {state} is not a rank state")
        ti = int(np.searchsorted(self.offsets, state, side="right")) - 1
        l, a = divmod(ti, self.traps_per_line)
        return l + 1, a + 1, state - self.offsets[ti]

    def entrance(self, l: int) -> int:
        return self.state_id(l, self.traps_per_line, 0)

    def line_bounds(self, l: int) -> tuple[int, int]:
        lo = self.offsets[self._ti(l, 1)]
        ti_last = self._ti(l, self.traps_per_line)
        hi = self.offsets[ti_last] + self.trap_sizes[ti_last]
        return lo, hi

    def line_capacity(self, l: int) -> int:
        lo, hi = self.line_bounds(l)
        return hi - lo


def build_line_layout(m: int, scatter: int = 0) -> LineLayout:
    """Exact layout for n = 3 m^3 (m+1), plus optional scattered states."""
    graph = build_routing_graph(m)
    lines = m * m
    tpl = 3 * m
    sizes = _scatter_sizes(m + 1, lines * tpl, scatter)
    offsets = np.cumsum([0] + sizes[:-1]).tolist()
    return LineLayout(
        m=m,
        lines=lines,
        traps_per_line=tpl,
        trap_sizes=tuple(sizes),
        offsets=tuple(offsets),
        n=sum(sizes),
        graph=graph,
    )


@dataclass(frozen=True)
class IsolatedLineLayout:
    """Single line of traps with X as an absorbing sink (arrivals disabled)."""

    m: int
    traps: int
    trap_sizes: tuple[int, ...]  # index a-1
    offsets: tuple[int, ...]
    capacity: int  # rank states; X has identifier capacity

    @property
    def x_state(self) -> int:
        return self.capacity

    def top(self, a: int) -> int:
        return self.trap_sizes[a - 1] - 1

    def state_id(self, a: int, b: int) -> int:
        if not 1 <= a <= self.traps:
            raise ValueError(f"trap {a} out of range [1, {self.traps}]")
        if not 0 <= b < self.trap_sizes[a - 1]:
            raise ValueError(f"position {b} out of range for trap {a}")
        return self.offsets[a - 1] + b

    def trap_pos(self, state: int) -> tuple[int, int]:
        if not 0 <= state < self.capacity:
            raise ValueError(f"state {state} is not a rank state")
        ti = int(np.searchsorted(self.offsets, state, side="right")) - 1
        return ti + 1, state - self.offsets[ti]


def build_isolated_line(m: int, traps: int | None = None, scatter: int = 0) -> IsolatedLineLayout:
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    if traps is None:
        traps = 3 * m
    if traps < 1:
        raise ValueError(f"need at least one trap, got {traps}")
    sizes = _scatter_sizes(m + 1, traps, scatter)
    offsets = np.cumsum([0] + sizes[:-1]).tolist()
    return IsolatedLineLayout(
        m=m,
        traps=traps,
        trap_sizes=tuple(sizes),
        offsets=tuple(offsets),
        capacity=sum(sizes),
    )


# ---------------------------------------------------------------------------
# Transition functions


def delta(s1: int, s2: int, layout: LineLayout) -> tuple[int, int]:
    """Full-system transition function over state identifiers."""
    x = layout.x_state
    if not (0 <= s1 <= x and 0 <= s2 <= x):
        raise ValueError(f"states ({s1}, {s2}) out of range [0, {x}]")
    if s1 == s2:
        if s1 == x:
            return x, layout.entrance(1)
        l, a, b = layout.trap_pos(s1)
        if b > 0:
            return s1, layout.state_id(l, a, b - 1)
        if a > 1:
            return layout.state_id(l, a, layout.top(l, a)), layout.state_id(l, a - 1, 0)
        return layout.state_id(l, 1, layout.top(l, 1)), x
    if s2 == x and s1 != x:
        l, a, _b = layout.trap_pos(s1)
        band = (a - 1) // layout.m
        target = layout.graph.neighbours(l)[band]
        return s1, layout.entrance(target)
    return s1, s2


def isolated_delta(s1: int, s2: int, layout: IsolatedLineLayout) -> tuple[int, int]:
    """Single-line transition function; X is inert (no arrivals, no routing)."""
    x = layout.x_state
    if not (0 <= s1 <= x and 0 <= s2 <= x):
        raise ValueError(f"states ({s1}, {s2}) out of range [0, {x}]")
    if s1 != s2 or s1 == x:
        return s1, s2
    a, b = layout.trap_pos(s1)
    if b > 0:
        return s1, layout.state_id(a, b - 1)
    if a > 1:
        return layout.state_id(a, layout.top(a)), layout.state_id(a - 1, 0)
    return layout.state_id(1, layout.top(1)), layout.x_state


def make_line(m: int, scatter: int = 0) -> Protocol:
    layout = build_line_layout(m, scatter)

    def _delta(s1: int, s2: int) -> tuple[int, int]:
        return delta(s1, s2, layout)

    def _encode(state: int) -> str:
        if state == layout.x_state:
            return "X"
        l, a, b = layout.trap_pos(state)
        return f"{l}:{a}:{b}"

    def _decode(token: str) -> int:
        if token == "X":
            return layout.x_state
        l, a, b = token.split(":")
        return layout.state_id(int(l), int(a), int(b))

    return Protocol(
        name="line",
        num_ranks=layout.n,
        num_extra=1,
        population=layout.n,
        delta=_delta,
        layout=layout,
        encode_state=_encode,
        decode_state=_decode,
        header=f"line m={layout.m}",
    )


def make_isolated_line(m: int, traps: int | None = None, scatter: int = 0) -> Protocol:
    layout = build_isolated_line(m, traps, scatter)

    def _delta(s1: int, s2: int) -> tuple[int, int]:
        return isolated_delta(s1, s2, layout)

    def _encode(state: int) -> str:
        if state == layout.x_state:
            return "X"
        a, b = layout.trap_pos(state)
        return f"{a}:{b}"

    def _decode(token: str) -> int:
        if token == "X":
            return layout.x_state
        a, b = token.split(":")
        return layout.state_id(int(a), int(b))

    return Protocol(
        name="line-isolated",
        num_ranks=layout.capacity,
        num_extra=1,
        population=layout.capacity,
        delta=_delta,
        layout=layout,
        encode_state=_encode,
        decode_state=_decode,
        header=f"line-isolated m={layout.m} traps={layout.traps}",
    )


# ---------------------------------------------------------------------------
# Silent-outcome recursion and occupancy vectors


def silent_line_outcome(
    beta, gamma, m: int, caps=None
) -> tuple[np.ndarray, np.ndarray, int]:
    """Predict the unique silent outcome of an isolated line from counts.

    ``beta[a-1]`` is the number of agents on inner states of trap a,
    ``gamma[a-1]`` the number on its gate, with trap indices ascending
    (trap 1 is the exit; the last trap is the entrance).  ``caps`` gives
    per-trap inner capacities (default m everywhere).

    Walking from the entrance down, with x the agents spilling into trap a
    from above: y = x + gamma_a; if beta_a + floor(y/2) fits under the
    cap, the trap retains beta_a + floor(y/2) inner agents plus y mod 2 on
    the gate and passes floor(y/2) on; otherwise it retains a full column
    (cap inner agents, one on the gate) and passes beta_a + y - cap - 1.
    Returns (final inner counts, final gate counts, released agents).
    """
    beta = np.asarray(beta, dtype=np.int64)
    gamma = np.asarray(gamma, dtype=np.int64)
    if beta.shape != gamma.shape or beta.ndim != 1 or beta.size == 0:
        raise ValueError("beta and gamma must be equal-length non-empty vectors")
    if beta.min() < 0 or gamma.min() < 0:
        raise ValueError("occupancy counts must be non-negative")
    if caps is None:
        caps = np.full(beta.size, m, dtype=np.int64)
    else:
        caps = np.asarray(caps, dtype=np.int64)
        if caps.shape != beta.shape or caps.min() < 1:
            raise ValueError("caps must match beta in length and be >= 1")

    beta_bar = np.zeros_like(beta)
    gamma_bar = np.zeros_like(gamma)
    x = 0
    for a in range(beta.size - 1, -1, -1):
        y = x + int(gamma[a])
        half = y // 2
        if int(beta[a]) + half <= int(caps[a]):
            beta_bar[a] = int(beta[a]) + half
            gamma_bar[a] = y - 2 * half
            x = half
        else:
            beta_bar[a] = int(caps[a])
            gamma_bar[a] = 1
            x = int(beta[a]) + y - int(caps[a]) - 1
    return beta_bar, gamma_bar, x


@dataclass(frozen=True)
class LineVectors:
    """Occupancy vectors of one line and their silent-outcome summary.

    All per-trap arrays are indexed ascending (index a-1 for trap a).
    ``alpha`` is how far each trap can saturate on its own agents,
    ``delta`` the leftover gate parity, ``rho`` the local overflow each
    trap would push onward; ``r`` bounds the released count ``s`` from
    above, and ``d`` is the line's deficit (unoccupied states in the
    predicted silent outcome).
    """

    line: int
    beta: np.ndarray
    gamma: np.ndarray
    alpha: np.ndarray
    delta: np.ndarray
    rho: np.ndarray
    beta_bar: np.ndarray
    gamma_bar: np.ndarray
    r: int
    s: int
    d: int


def _vectors(beta, gamma, caps, capacity: int, line: int, m: int) -> LineVectors:
    beta = np.asarray(beta, dtype=np.int64)
    gamma = np.asarray(gamma, dtype=np.int64)
    caps = np.asarray(caps, dtype=np.int64)
    half = gamma // 2
    fits = beta + half <= caps
    alpha = np.minimum(beta + half, caps)
    delta_v = np.where(fits, gamma % 2, 1).astype(np.int64)
    rho = np.where(fits, half, beta + gamma - caps - 1).astype(np.int64)
    beta_bar, gamma_bar, s = silent_line_outcome(beta, gamma, m, caps)
    retained = int(beta_bar.sum() + gamma_bar.sum())
    return LineVectors(
        line=line,
        beta=beta,
        gamma=gamma,
        alpha=alpha,
        delta=delta_v,
        rho=rho,
        beta_bar=beta_bar,
        gamma_bar=gamma_bar,
        r=int(rho.sum()),
        s=int(s),
        d=capacity - retained,
    )


def line_vectors(config: Configuration, layout: LineLayout, l: int) -> LineVectors:
    """Per-trap occupancy vectors of line l in a full-system configuration."""
    tpl = layout.traps_per_line
    beta = np.zeros(tpl, dtype=np.int64)
    gamma = np.zeros(tpl, dtype=np.int64)
    caps = np.zeros(tpl, dtype=np.int64)
    for a in range(1, tpl + 1):
        lo = layout.offsets[layout._ti(l, a)]
        size = layout.trap_size(l, a)
        gamma[a - 1] = config.counts[lo]
        beta[a - 1] = int(config.counts[lo + 1 : lo + size].sum())
        caps[a - 1] = size - 1
    return _vectors(beta, gamma, caps, layout.line_capacity(l), l, layout.m)


def isolated_vectors(config: Configuration, layout: IsolatedLineLayout) -> LineVectors:
    """Occupancy vectors of an isolated line (line index reported as 1)."""
    beta = np.zeros(layout.traps, dtype=np.int64)
    gamma = np.zeros(layout.traps, dtype=np.int64)
    caps = np.zeros(layout.traps, dtype=np.int64)
    for a in range(1, layout.traps + 1):
        lo = layout.offsets[a - 1]
        size = layout.trap_sizes[a - 1]
        gamma[a - 1] = config.counts[lo]
        beta[a - 1] = int(config.counts[lo + 1 : lo + size].sum())
        caps[a - 1] = size - 1
    return _vectors(beta, gamma, caps, layout.capacity, 1, layout.m)


def indicated(config: Configuration, layout: LineLayout, l: int) -> bool:
    """True iff more than m(m+1) states of traps pointing to line l are occupied.

    Trap a of line lp points to neighbour slot (a-1) // m of lp; the traps
    pointing to l across the whole system cover exactly 3m(m+1) states, so
    an indicated line signals more than a third of them occupied.
    """
    occupied = 0
    for lp in range(1, layout.lines + 1):
        nb = layout.graph.neighbours(lp)
        for band in range(3):
            if nb[band] == l:
                for a in range(band * layout.m + 1, (band + 1) * layout.m + 1):
                    lo = layout.offsets[layout._ti(lp, a)]
                    size = layout.trap_size(lp, a)
                    occupied += int(np.count_nonzero(config.counts[lo : lo + size]))
    return occupied > layout.m * (layout.m + 1)


def sample_tidy_counts(rng: Rng, layout: IsolatedLineLayout, n_agents: int) -> np.ndarray:
    """Random tidy occupancy over an isolated line (X left empty).

    Each agent picks a uniform state; inner placements are then rearranged
    per trap so that every state holding two or more agents sits above
    every empty inner state, which is the normal form the silent-outcome
    recursion presupposes.  Gate counts are unconstrained.
    """
    if n_agents < 0:
        raise ValueError(f"n_agents must be non-negative, got {n_agents}")
    counts = np.zeros(layout.capacity + 1, dtype=np.int64)
    per_trap_inner: list[list[int]] = [
        [0] * (layout.trap_sizes[a] - 1) for a in range(layout.traps)
    ]
    for _ in range(n_agents):
        s = rng.randbelow(layout.capacity)
        a, b = layout.trap_pos(s)
        if b == 0:
            counts[layout.state_id(a, 0)] += 1
        else:
            per_trap_inner[a - 1][b - 1] += 1
    for a in range(1, layout.traps + 1):
        slots = per_trap_inner[a - 1]
        zeros = [v for v in slots if v == 0]
        ones = [v for v in slots if v == 1]
        multis = [v for v in slots if v >= 2]
        for i in range(len(multis) - 1, 0, -1):
            j = rng.randbelow(i + 1)
            multis[i], multis[j] = multis[j], multis[i]
        arranged = zeros + multis
        for v in ones:
            pos = rng.randbelow(len(arranged) + 1)
            arranged.insert(pos, v)
        for b, v in enumerate(arranged, start=1):
            counts[layout.state_id(a, b)] = v
    return counts
