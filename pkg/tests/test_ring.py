"""Cyclic trap arrangement: construction, rules, status reports, tidiness."""

from __future__ import annotations

import numpy as np
import pytest

from helpers import run_chunked
from poprank.engine import Configuration, RandomInit, gen_initial, run_until_silent
from poprank.oracles import validate_ranking
from poprank.protocol import full_tables
from poprank.protocols import make_isolated_line, make_ring
from poprank.protocols.line import isolated_vectors, silent_line_outcome
from poprank.protocols.ring import (
    RingLayout,
    build_ring,
    delta,
    is_tidy,
    trap_status,
)
from poprank.rng import Rng


# ---------------------------------------------------------------------------
# Construction


@pytest.mark.parametrize(
    "n,sizes",
    [
        (2, (2,)),
        (3, (3,)),
        (6, (3, 3)),
        (11, (6, 5)),
        (12, (4, 4, 4)),
        (14, (5, 5, 4)),
        (20, (5, 5, 5, 5)),
    ],
)
def test_build_ring_frozen_sizes(n, sizes):
    layout = build_ring(n)
    assert layout.trap_sizes == sizes
    assert layout.n == n
    assert layout.m == len(sizes)


def test_build_ring_sizes_total_and_balance():
    for n in range(2, 400):
        layout = build_ring(n)
        assert sum(layout.trap_sizes) == n
        # Remainder spreads round-robin: sizes differ by at most one and
        # are non-increasing from trap 0.
        assert max(layout.trap_sizes) - min(layout.trap_sizes) <= 1
        assert list(layout.trap_sizes) == sorted(layout.trap_sizes, reverse=True)
        assert min(layout.trap_sizes) >= layout.m + 1 or layout.m == 1


def test_build_ring_errors():
    with pytest.raises(ValueError):
        build_ring(1)
    with pytest.raises(ValueError):
        build_ring(0)


def test_state_id_round_trip():
    layout = build_ring(14)
    seen = set()
    for a in range(layout.m):
        for b in range(layout.trap_sizes[a]):
            s = layout.state_id(a, b)
            assert layout.trap_pos(s) == (a, b)
            seen.add(s)
    assert seen == set(range(14))
    with pytest.raises(ValueError):
        layout.state_id(3, 0)
    with pytest.raises(ValueError):
        layout.state_id(0, 5)


def test_top_is_deepest_inner_state():
    layout = build_ring(14)
    assert [layout.top(a) for a in range(3)] == [4, 4, 3]


# ---------------------------------------------------------------------------
# Transition rules


def test_delta_frozen_examples_n12():
    layout = build_ring(12)
    # Trap sizes (4,4,4); trap a occupies ids 4a..4a+3 with b = id - 4a.
    # Inner collision steps the responder down one rung.
    assert delta(6, 6, layout) == (6, 5)
    # Gate collision: initiator climbs to its top, responder moves to the
    # next trap's gate.
    assert delta(0, 0, layout) == (3, 4)
    assert delta(8, 8, layout) == (11, 0)
    # Distinct states never react, even within one trap.
    assert delta(5, 6, layout) == (5, 6)
    assert delta(0, 4, layout) == (0, 4)


def test_delta_single_trap_wraps_to_itself():
    layout = build_ring(2)
    assert delta(0, 0, layout) == (1, 0)
    assert delta(1, 1, layout) == (1, 0)


def test_delta_range_errors():
    layout = build_ring(12)
    with pytest.raises(ValueError):
        delta(12, 0, layout)
    with pytest.raises(ValueError):
        delta(0, -1, layout)


@pytest.mark.parametrize("n", [2, 6, 12, 14])
def test_full_tables_off_diagonal_identity(n):
    proto = make_ring(n)
    t1, t2 = full_tables(proto)
    s = proto.num_states
    for a in range(s):
        for b in range(s):
            if a != b:
                assert t1[a, b] == a and t2[a, b] == b


def test_protocol_encoding():
    proto = make_ring(14)
    assert proto.name == "ring"
    assert proto.encode(5) == "1:0"
    assert proto.decode("1:0") == 5
    assert proto.header == "ring m=3 sizes=5,5,4"
    assert proto.num_extra == 0


# ---------------------------------------------------------------------------
# Status reports


def _counts(layout: RingLayout, placed: dict[tuple[int, int], int]) -> np.ndarray:
    counts = np.zeros(layout.n, dtype=np.int64)
    for (a, b), c in placed.items():
        counts[layout.state_id(a, b)] = c
    return counts


def test_trap_status_frozen_cases():
    layout = build_ring(12)
    # Trap 0 holding one agent per state: fully stabilised (and therefore
    # no longer "almost", which requires an empty gate).
    counts = _counts(layout, {(0, b): 1 for b in range(4)})
    st = trap_status(counts, layout, 0)
    assert st.occupants == 4
    assert st.gaps == 0
    assert st.surplus == 0
    assert st.saturated and st.full and st.fully_stabilised
    assert not st.almost_stabilised

    # Two agents stacked at the gate, top two rungs empty.
    counts = _counts(layout, {(0, 0): 2, (0, 1): 1})
    st = trap_status(counts, layout, 0)
    assert st.occupants == 3
    assert st.gaps == 2
    assert st.surplus == 0
    assert not st.saturated and not st.full
    assert not st.almost_stabilised

    # Gate empty, every inner rung single: almost stabilised, not full.
    counts = _counts(layout, {(0, 1): 1, (0, 2): 1, (0, 3): 1})
    st = trap_status(counts, layout, 0)
    assert st.gaps == 0
    assert st.saturated and not st.full
    assert st.almost_stabilised and not st.fully_stabilised

    # Nine agents in a size-4 trap: five beyond one-per-state.
    counts = _counts(layout, {(0, b): c for b, c in [(0, 3), (1, 2), (2, 2), (3, 2)]})
    st = trap_status(counts, layout, 0)
    assert st.occupants == 9
    assert st.surplus == 5
    assert st.saturated and st.full
    assert not st.almost_stabilised and not st.fully_stabilised


def test_is_tidy_cases():
    layout = build_ring(12)
    # A full ranking is tidy.
    counts = np.ones(12, dtype=np.int64)
    assert is_tidy(counts, layout)
    # Surplus moves downward, so an overload above a gap drains into it:
    # still tidy.
    counts = _counts(layout, {(0, 0): 1, (0, 2): 2, (0, 3): 1, (1, 0): 8})
    assert is_tidy(counts, layout)
    # An overload below a gap is stuck: untidy.
    counts = _counts(layout, {(0, 1): 2, (0, 3): 1, (1, 0): 9})
    assert not is_tidy(counts, layout)
    # Gate surplus is exempt (it reaches gaps through the top).
    counts = _counts(layout, {(0, 0): 2, (0, 1): 1, (1, 0): 9})
    assert is_tidy(counts, layout)
    # Gaps only, no overload: tidy.
    counts = _counts(layout, {(0, 0): 1, (1, 0): 11})
    assert is_tidy(counts, layout)


# ---------------------------------------------------------------------------
# Saturation threshold (single trap, inert exit)


@pytest.mark.parametrize(
    "gate_load,expect_saturated", [(2, False), (3, False), (4, True), (7, True)]
)
def test_single_trap_saturation_threshold(gate_load, expect_saturated):
    # One trap of inner capacity 4 with an inert exit, top two rungs
    # empty (deficit d=2): the trap saturates iff the gate holds g >= 2d,
    # since each filled gap costs one ejected agent.
    proto = make_isolated_line(4, traps=1)
    layout = proto.layout
    cap = layout.trap_sizes[0] - 1  # inner capacity
    counts = np.zeros(proto.num_states, dtype=np.int64)
    counts[layout.state_id(1, 0)] = gate_load
    counts[layout.state_id(1, 1)] = 1
    counts[layout.state_id(1, 2)] = 1
    cfg = Configuration.from_counts(counts)
    rng = Rng(1000 + gate_load)
    stats = run_until_silent(cfg, proto, rng, 10**8)
    assert stats.silent

    inner_final = cfg.counts[layout.state_id(1, 1) : layout.state_id(1, cap) + 1]
    saturated = bool(np.all(inner_final >= 1))
    assert saturated == expect_saturated
    assert np.all(inner_final <= 1)

    # The closed-form outcome matches the simulated counts exactly.
    beta_bar, gamma_bar, s = silent_line_outcome([2], [gate_load], 4, caps=[cap])
    assert int(inner_final.sum()) == beta_bar[0]
    assert int(cfg.counts[layout.state_id(1, 0)]) == gamma_bar[0]
    assert int(cfg.counts[layout.x_state]) == s
    vec = isolated_vectors(cfg, layout)
    assert vec.beta_bar.tolist() == [beta_bar[0]]
    assert vec.s == 0  # a silent line releases nothing more


# ---------------------------------------------------------------------------
# Stabilisation and persistence


@pytest.mark.parametrize("n,seed", [(6, 0), (12, 1), (14, 2), (30, 3)])
def test_stabilises_to_full_ranking(n, seed):
    proto = make_ring(n)
    rng = Rng(seed)
    cfg = gen_initial(RandomInit(), proto, rng)
    stats = run_until_silent(cfg, proto, rng, 10**9)
    assert stats.silent
    assert validate_ranking(cfg, proto).valid_ranking


def test_occupied_inner_sets_grow_monotonically():
    # m=3 ring, 10 random runs sampled every n interactions: once an inner
    # state is occupied it stays occupied, full traps stay full, and a tidy
    # configuration never turns untidy.
    proto = make_ring(12)
    layout = proto.layout
    inner_ids = [
        layout.state_id(a, b)
        for a in range(layout.m)
        for b in range(1, layout.trap_sizes[a])
    ]

    for seed in range(10):
        rng = Rng(5000 + seed)
        cfg = gen_initial(RandomInit(), proto, rng)
        prev_occ = {i for i in inner_ids if cfg.counts[i] > 0}
        prev_full = {
            a for a in range(layout.m) if trap_status(cfg.counts, layout, a).full
        }
        was_tidy = is_tidy(cfg.counts, layout)

        def check(config: Configuration) -> None:
            nonlocal prev_occ, prev_full, was_tidy
            occ = {i for i in inner_ids if config.counts[i] > 0}
            assert prev_occ <= occ
            full = {
                a
                for a in range(layout.m)
                if trap_status(config.counts, layout, a).full
            }
            assert prev_full <= full
            tidy = is_tidy(config.counts, layout)
            if was_tidy:
                assert tidy
            prev_occ, prev_full, was_tidy = occ, full, tidy

        _, silent = run_chunked(
            cfg, proto, rng, chunk=12, max_chunks=10**6, callback=check
        )
        assert silent
