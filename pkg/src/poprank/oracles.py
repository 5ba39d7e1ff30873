"""Independent validity checks: ranking verdicts and exhaustive state search.

``validate_ranking`` inspects a configuration directly; it does not consult
the transition function, so it can serve as the ground truth after a run.

``exhaustive_silence_check`` enumerates every configuration of a small
protocol as a multiset (agent identities are irrelevant to the reachability
question), builds the one-interaction successor relation, and verifies the
two stabilisation properties: every silent configuration is a correct
outcome, and every configuration can reach a silent one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import comb

from .engine import Configuration
from .protocol import Protocol


@dataclass(frozen=True)
class Verdict:
    """Ranking verdict for a configuration.

    ``violations`` lists rank states whose occupancy differs from one;
    ``extras_occupied`` lists occupied extra states; ``k_distance`` counts
    unoccupied rank states.  A valid ranking has no violations and no
    occupied extras.
    """

    valid_ranking: bool
    violations: tuple[tuple[int, int], ...]
    k_distance: int
    extras_occupied: tuple[tuple[int, int], ...] = field(default=())


def validate_ranking(config: Configuration, protocol: Protocol) -> Verdict:
    nr = protocol.num_ranks
    counts = config.counts
    violations = tuple(
        (s, int(counts[s])) for s in range(nr) if counts[s] != 1
    )
    extras = tuple(
        (s, int(counts[s])) for s in range(nr, protocol.num_states) if counts[s] > 0
    )
    return Verdict(
        valid_ranking=not violations and not extras,
        violations=violations,
        k_distance=sum(1 for s in range(nr) if counts[s] == 0),
        extras_occupied=extras,
    )


def _successors(state_tuple: tuple[int, ...], protocol: Protocol) -> set[tuple[int, ...]]:
    """Distinct successor multisets reachable in one interaction."""
    out: set[tuple[int, ...]] = set()
    seen_pairs: set[tuple[int, int]] = set()
    states = state_tuple
    for idx1, s1 in enumerate(states):
        for idx2, s2 in enumerate(states):
            if idx1 == idx2 or (s1, s2) in seen_pairs:
                continue
            seen_pairs.add((s1, s2))
            t1, t2 = protocol.delta(s1, s2)
            if t1 == s1 and t2 == s2:
                continue
            nxt = list(states)
            nxt[idx1] = t1
            nxt[idx2] = t2
            out.add(tuple(sorted(nxt)))
    return out


def _good_silent(state_tuple: tuple[int, ...], protocol: Protocol) -> bool:
    """Is a silent multiset a correct outcome?

    With population equal to the rank count this demands the full ranking
    (a bijection onto rank states).  Smaller populations cannot cover every
    rank, so the requirement weakens to injective occupancy of rank states
    with no extras.
    """
    if any(s >= protocol.num_ranks for s in state_tuple):
        return False
    if len(set(state_tuple)) != len(state_tuple):
        return False
    if len(state_tuple) == protocol.num_ranks:
        return set(state_tuple) == set(range(protocol.num_ranks))
    return True


def exhaustive_silence_check(
    protocol: Protocol,
    population: int,
    max_states: int = 12,
    max_configs: int = 1_000_000,
) -> dict:
    """Enumerate all configurations and check stabilisation properties.

    Returns a JSON-ready report with keys protocol, n, configs_total,
    silent_configs, bad_silent, unreachable (configurations from which no
    silent configuration is reachable).  If the enumeration would exceed
    max_configs it stops early and the report carries ``partial: true``;
    the reachability count is then relative to the enumerated subset.
    """
    if protocol.num_states > max_states:
        raise ValueError(
            f"state space {protocol.num_states} exceeds max_states={max_states}"
        )
    if not 1 <= population <= 8:
        raise ValueError(f"population must lie in [1, 8], got {population}")

    total_count = comb(protocol.num_states + population - 1, population)
    partial = total_count > max_configs

    configs: list[tuple[int, ...]] = []
    for tup in combinations_with_replacement(range(protocol.num_states), population):
        configs.append(tup)
        if len(configs) >= max_configs:
            break
    index = {tup: i for i, tup in enumerate(configs)}

    succ: list[set[int]] = []
    pred: list[set[int]] = [set() for _ in configs]
    silent: list[bool] = []
    for i, tup in enumerate(configs):
        nxt = _successors(tup, protocol)
        silent.append(not nxt)
        ids = {index[t] for t in nxt if t in index}
        succ.append(ids)
        for j in ids:
            pred[j].add(i)

    bad_silent = sum(
        1 for i, tup in enumerate(configs) if silent[i] and not _good_silent(tup, protocol)
    )

    # Reverse reachability from the silent set.
    reached = [False] * len(configs)
    frontier = [i for i in range(len(configs)) if silent[i]]
    for i in frontier:
        reached[i] = True
    while frontier:
        j = frontier.pop()
        for i in pred[j]:
            if not reached[i]:
                reached[i] = True
                frontier.append(i)
    unreachable = reached.count(False)

    report = {
        "protocol": protocol.name,
        "n": population,
        "configs_total": len(configs),
        "silent_configs": sum(silent),
        "bad_silent": bad_silent,
        "unreachable": unreachable,
    }
    if partial:
        report["partial"] = True
    return report
