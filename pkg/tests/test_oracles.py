"""Ranking verdicts and the exhaustive reachability checker."""

from __future__ import annotations

import json
from math import comb

import pytest

from poprank.engine import Configuration
from poprank.oracles import Verdict, exhaustive_silence_check, validate_ranking
from poprank.protocol import Protocol
from poprank.protocols import make_generic, make_ring, make_tree


# ---------------------------------------------------------------------------
# validate_ranking


def test_perfect_ranking():
    proto = make_generic(4)
    v = validate_ranking(Configuration.from_agents([3, 1, 0, 2], 4), proto)
    assert v == Verdict(True, (), 0, ())


def test_doubled_rank():
    proto = make_generic(4)
    v = validate_ranking(Configuration.from_agents([0, 0, 2, 3], 4), proto)
    assert not v.valid_ranking
    assert v.violations == ((0, 2), (1, 0))
    assert v.k_distance == 1


def test_occupied_extra_state():
    proto = make_tree(4, k=2)
    cfg = Configuration.from_agents([0, 1, 2, 4], proto.num_states)
    v = validate_ranking(cfg, proto)
    assert not v.valid_ranking
    assert v.violations == ((3, 0),)
    assert v.extras_occupied == ((4, 1),)
    assert v.k_distance == 1


def test_small_population_counts_missing_ranks():
    proto = make_generic(5)
    v = validate_ranking(Configuration.from_agents([0, 2], 5), proto)
    assert not v.valid_ranking
    assert v.k_distance == 3
    assert v.violations == ((1, 0), (3, 0), (4, 0))


# ---------------------------------------------------------------------------
# exhaustive_silence_check on the real protocols


def test_generic_n2_report():
    report = exhaustive_silence_check(make_generic(2), 2)
    assert report == {
        "protocol": "generic",
        "n": 2,
        "configs_total": 3,
        "silent_configs": 1,
        "bad_silent": 0,
        "unreachable": 0,
    }


@pytest.mark.parametrize("n,total", [(2, 3), (3, 10), (4, 35)])
def test_generic_full_population_clean(n, total):
    report = exhaustive_silence_check(make_generic(n), n)
    assert report["configs_total"] == total == comb(2 * n - 1, n)
    assert report["silent_configs"] == 1
    assert report["bad_silent"] == 0
    assert report["unreachable"] == 0
    assert "partial" not in report


@pytest.mark.parametrize("population", [2, 3, 4, 5, 6])
def test_ring_two_traps_clean(population):
    proto = make_ring(6)
    report = exhaustive_silence_check(proto, population)
    assert report["configs_total"] == comb(5 + population, population)
    # Any all-distinct placement is silent and injectivity is all that a
    # short population can achieve.
    assert report["silent_configs"] == comb(6, population)
    assert report["bad_silent"] == 0
    assert report["unreachable"] == 0


def test_tree_with_signals_clean():
    proto = make_tree(2, k=1)
    report = exhaustive_silence_check(proto, 2)
    assert report["configs_total"] == 10
    assert report["silent_configs"] == 1
    assert report["bad_silent"] == 0
    assert report["unreachable"] == 0


def test_report_is_json_ready():
    report = exhaustive_silence_check(make_generic(3), 3)
    assert json.loads(json.dumps(report)) == report


# ---------------------------------------------------------------------------
# The checker actually catches broken protocols


def _toy(delta, num_ranks=2, num_extra=0) -> Protocol:
    return Protocol(
        name="toy",
        num_ranks=num_ranks,
        num_extra=num_extra,
        population=num_ranks,
        delta=delta,
        layout=None,
        header=None,
    )


def test_flags_bad_silent_configurations():
    inert = _toy(lambda a, b: (a, b))
    report = exhaustive_silence_check(inert, 2)
    assert report["silent_configs"] == 3
    assert report["bad_silent"] == 2  # the two doubled placements
    assert report["unreachable"] == 0


def test_flags_unreachable_configurations():
    # Swapping is activity that never changes the multiset, so the mixed
    # configuration can reach nothing silent.
    swap = _toy(lambda a, b: (b, a) if a != b else (a, b))
    report = exhaustive_silence_check(swap, 2)
    assert report["silent_configs"] == 2
    assert report["bad_silent"] == 2
    assert report["unreachable"] == 1


def test_partial_enumeration_is_marked():
    report = exhaustive_silence_check(make_generic(4), 8, max_configs=50)
    assert report["partial"] is True
    assert report["configs_total"] == 50


def test_argument_errors():
    with pytest.raises(ValueError):
        exhaustive_silence_check(make_generic(13), 2)
    with pytest.raises(ValueError):
        exhaustive_silence_check(make_generic(4), 0)
    with pytest.raises(ValueError):
        exhaustive_silence_check(make_generic(4), 9)
    # A larger cap admits a larger protocol.
    report = exhaustive_silence_check(make_generic(13), 2, max_states=16)
    assert report["bad_silent"] == 0
