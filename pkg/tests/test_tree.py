"""Balanced rank tree with a reset line: structure, rules, dispersion."""

from __future__ import annotations

from math import ceil, log2

import numpy as np
import pytest

from poprank.engine import Configuration, RandomInit, gen_initial, run_until_silent
from poprank.oracles import validate_ranking
from poprank.protocols import make_tree
from poprank.protocols.tree import (
    KIND_BRANCH,
    KIND_CHAIN,
    KIND_LEAF,
    build_tree,
    classify_load,
    default_k,
    delta,
    disperse,
    dispersion_oracle,
)
from poprank.rng import Rng


# ---------------------------------------------------------------------------
# Structure


def test_build_tree_frozen_n9():
    t = build_tree(9)
    assert t.kind.tolist() == [2, 1, 2, 0, 0, 1, 2, 0, 0]
    assert t.left.tolist() == [1, 2, 3, -1, -1, 6, 7, -1, -1]
    assert t.right.tolist() == [5, -1, 4, -1, -1, -1, 8, -1, -1]
    assert t.level.tolist() == [0, 1, 2, 3, 3, 1, 2, 3, 3]
    assert t.subtree.tolist() == [9, 4, 3, 1, 1, 4, 3, 1, 1]
    assert t.height == 3
    assert t.children(0) == (1, 5)
    assert t.children(1) == (2,)
    assert t.children(3) == ()


def test_build_tree_frozen_n6():
    t = build_tree(6)
    assert t.kind.tolist() == [1, 2, 1, 0, 1, 0]
    assert t.left.tolist() == [1, 2, 3, -1, 5, -1]
    assert t.right.tolist() == [-1, 4, -1, -1, -1, -1]
    assert t.subtree.tolist() == [6, 5, 2, 1, 2, 1]


def test_build_tree_tiny():
    t1 = build_tree(1)
    assert t1.kind.tolist() == [KIND_LEAF]
    t2 = build_tree(2)
    assert t2.kind.tolist() == [KIND_CHAIN, KIND_LEAF]
    with pytest.raises(ValueError):
        build_tree(0)


@pytest.mark.parametrize(
    "n",
    list(range(1, 130)) + [511, 512, 513, 1023, 1024, 2047, 2048, 100_000],
)
def test_tree_structure_invariants(n):
    t = build_tree(n)
    kind, left, right = t.kind, t.left, t.right
    level, subtree = t.level, t.subtree
    assert subtree[0] == n
    for p in range(n):
        size = int(subtree[p])
        if size == 1:
            assert kind[p] == KIND_LEAF and left[p] == -1 and right[p] == -1
        elif size % 2 == 0:
            assert kind[p] == KIND_CHAIN
            assert left[p] == p + 1 and right[p] == -1
            assert subtree[p + 1] == size - 1
            assert level[p + 1] == level[p] + 1
        else:
            assert kind[p] == KIND_BRANCH
            half = (size - 1) // 2
            assert left[p] == p + 1 and right[p] == p + half + 1
            assert subtree[left[p]] == half and subtree[right[p]] == half
            assert level[left[p]] == level[p] + 1
            assert level[right[p]] == level[p] + 1
    assert t.height <= 2 * ceil(log2(n + 1))


def test_default_k_values():
    assert default_k(1) == 1
    assert default_k(2) == 4
    assert default_k(9) == 16
    assert default_k(2048) == 44
    assert default_k(2049) == 48
    with pytest.raises(ValueError):
        default_k(0)


# ---------------------------------------------------------------------------
# Transition rules (n=9, k=4; X_i has identifier 8 + i)


def xid(i: int) -> int:
    return 9 + i - 1


@pytest.fixture(scope="module")
def t9():
    return build_tree(9)


def test_delta_rank_rules(t9):
    assert delta(0, 0, t9, 4) == (1, 5)  # branching root splits the pair
    assert delta(1, 1, t9, 4) == (1, 2)  # chain keeps initiator
    assert delta(5, 5, t9, 4) == (5, 6)
    assert delta(3, 3, t9, 4) == (xid(1), xid(1))  # doubled leaf resets
    assert delta(8, 8, t9, 4) == (xid(1), xid(1))
    assert delta(0, 1, t9, 4) == (0, 1)  # distinct ranks inert


def test_delta_signal_rules(t9):
    assert delta(xid(2), xid(7), t9, 4) == (xid(3), xid(3))
    assert delta(xid(3), xid(3), t9, 4) == (xid(4), xid(4))
    assert delta(xid(7), xid(2), t9, 4) == (xid(7), xid(2))  # needs i <= j
    assert delta(xid(8), xid(3), t9, 4) == (xid(8), xid(3))  # i at the cap
    assert delta(xid(8), xid(8), t9, 4) == (0, 0)  # both released to root


def test_delta_signal_meets_rank(t9):
    assert delta(xid(2), 5, t9, 4) == (xid(1), xid(1))  # red: restart
    assert delta(xid(4), 0, t9, 4) == (xid(1), xid(1))
    assert delta(xid(5), 5, t9, 4) == (0, 5)  # green: release to root
    assert delta(xid(8), 2, t9, 4) == (0, 2)
    assert delta(5, xid(2), t9, 4) == (5, xid(2))  # rank initiator: inert


def test_delta_range_errors(t9):
    with pytest.raises(ValueError):
        delta(17, 0, t9, 4)
    with pytest.raises(ValueError):
        delta(0, -1, t9, 4)


def test_signal_indices_never_decay_except_to_one(t9):
    # Full scan: any non-identity transition may only produce an extra
    # state that is a fresh restart (index 1) or one step above the
    # smallest participating signal.
    k = 4
    ns = 9 + 2 * k
    for a in range(ns):
        for b in range(ns):
            c, d = delta(a, b, t9, k)
            if (c, d) == (a, b):
                continue
            in_extras = [s - 9 + 1 for s in (a, b) if s >= 9]
            for o in (c, d):
                if o >= 9:
                    io = o - 9 + 1
                    if not in_extras:
                        assert io == 1  # leaf overload raises a fresh signal
                    else:
                        assert io == 1 or io == min(in_extras) + 1


def test_rank_rank_pairs_only_create_fresh_signals(t9):
    for a in range(9):
        for b in range(9):
            c, d = delta(a, b, t9, 4)
            for o in (c, d):
                if o >= 9:
                    assert o == xid(1)


def test_protocol_shape_and_encoding():
    proto = make_tree(9)
    assert proto.name == "tree"
    assert proto.num_ranks == 9
    assert proto.num_extra == 32  # k defaults to 16
    assert proto.num_states == 41
    assert proto.header == "tree n=9 k=16"
    assert proto.encode(8) == "8"
    assert proto.encode(9) == "X1"
    assert proto.encode(40) == "X32"
    assert proto.decode("X32") == 40
    with pytest.raises(ValueError):
        proto.decode("X33")
    with pytest.raises(ValueError):
        proto.decode("X0")
    with pytest.raises(ValueError):
        proto.decode("9")
    with pytest.raises(ValueError):
        make_tree(9, k=0)


# ---------------------------------------------------------------------------
# Dispersion oracle


def test_dispersion_frozen_n9():
    t = build_tree(9)
    assert dispersion_oracle(t, 10).tolist() == [0, 1, 0, 2, 2, 1, 0, 2, 2]
    assert dispersion_oracle(t, 9).tolist() == [1] * 9
    assert dispersion_oracle(t, 0).tolist() == [0] * 9
    assert dispersion_oracle(t, 1).tolist() == [1] + [0] * 8


def test_dispersion_frozen_n6():
    t = build_tree(6)
    assert dispersion_oracle(t, 6).tolist() == [1] * 6
    assert dispersion_oracle(t, 3).tolist() == [1, 0, 1, 0, 1, 0]


def test_disperse_mixed_start():
    t = build_tree(9)
    out = disperse(t, [2, 0, 3, 0, 0, 1, 0, 0, 0])
    assert out.tolist() == [0, 1, 1, 1, 1, 1, 1, 0, 0]


def test_disperse_properties():
    rng = Rng(15)
    for n in (1, 2, 5, 9, 16, 33, 100):
        t = build_tree(n)
        for _ in range(20):
            counts = np.zeros(n, dtype=np.int64)
            for _ in range(rng.randbelow(3 * n) + 1):
                counts[rng.randbelow(n)] += 1
            out = disperse(t, counts)
            assert out.sum() == counts.sum()
            non_leaf = out[t.kind != KIND_LEAF]
            assert np.all(non_leaf <= 1)
            # Dispersing a dispersed distribution changes nothing.
            assert np.array_equal(disperse(t, out), out)


def test_disperse_errors():
    t = build_tree(4)
    with pytest.raises(ValueError):
        disperse(t, [1, 2, 3])
    with pytest.raises(ValueError):
        disperse(t, [1, -1, 0, 0])
    with pytest.raises(ValueError):
        dispersion_oracle(t, -1)


def test_classify_load():
    t = build_tree(9)
    assert classify_load(np.array([9] + [0] * 8), t) == "balanced"
    assert classify_load(np.array([10] + [0] * 8), t) == "overloaded"
    assert classify_load(np.array([0, 0, 0, 2, 0, 0, 0, 0, 0]), t) == "overloaded"
    proto = make_tree(9, k=2)
    counts = np.zeros(proto.num_states, dtype=np.int64)
    counts[0] = 5
    counts[9] = 3  # signals do not take part in the downward flow
    assert classify_load(Configuration.from_counts(counts), t) == "balanced"


# ---------------------------------------------------------------------------
# Simulation agrees with the oracle


@pytest.mark.parametrize("n", [3, 6, 9, 16])
def test_balanced_starts_settle_exactly_as_dispersed(n):
    # As long as no leaf is predicted to overload, the agent flow is
    # downward-only and order-independent, so the run must land exactly
    # on the dispersed distribution with no signals raised.
    proto = make_tree(n, k=4)
    t = proto.layout
    rng = Rng(500 + n)
    for _ in range(10):
        counts = np.zeros(proto.num_states, dtype=np.int64)
        for _ in range(n):
            counts[rng.randbelow(n)] += 1
        expected = disperse(t, counts[:n])
        if classify_load(counts[:n], t) == "overloaded":
            continue
        cfg = Configuration.from_counts(counts)
        stats = run_until_silent(cfg, proto, rng, 10**8)
        assert stats.silent
        assert cfg.counts[:n].tolist() == expected.tolist()
        assert int(cfg.counts[n:].sum()) == 0


def test_overloaded_start_recovers_through_reset():
    # Two agents on a leaf cannot disperse; the signal line must detect
    # the overload and re-release the pair from the root.
    proto = make_tree(3, k=2)
    cfg = Configuration.from_counts(np.array([0, 2, 0] + [0] * 4, dtype=np.int64))
    rng = Rng(77)
    stats = run_until_silent(cfg, proto, rng, 10**7)
    assert stats.silent
    assert cfg.counts[:3].tolist() == [0, 1, 1]
    assert int(cfg.counts[3:].sum()) == 0


@pytest.mark.parametrize("n,seed", [(5, 1), (9, 2), (16, 3), (33, 4)])
def test_stabilises_from_random_configurations(n, seed):
    proto = make_tree(n, k=8)
    rng = Rng(seed)
    for _ in range(5):
        cfg = gen_initial(RandomInit(), proto, rng)
        stats = run_until_silent(cfg, proto, rng, 10**9)
        assert stats.silent
        assert validate_ranking(cfg, proto).valid_ranking
