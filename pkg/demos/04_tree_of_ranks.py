"""Ranking on a tree: near-linear settling via downward dispersal.

Ranks are arranged as a tree in pre-order: a doubled rank sends the
responder to a child (alternating children at branch points), so crowds
disperse downwards and n agents dropped on the root spread to exactly
one agent per rank.  Leaves that still collide emit a survivor signal
X1; signals merge and count upwards (X_i meeting X_j >= X_i becomes two
copies of X_{i+1}), and a signal that climbs past a threshold k without
meeting a lone rank resets the population.  The result is near-linear
parallel settling time, versus quadratic for the cycle.

Run with: python demos/04_tree_of_ranks.py
"""

from __future__ import annotations

import numpy as np

from poprank.engine import Configuration, gen_initial, parse_init, run_until_silent
from poprank.harness import run_single, trial_seed
from poprank.protocols.tree import (
    build_tree,
    classify_load,
    default_k,
    dispersion_oracle,
    make_tree,
)
from poprank.rng import Rng

KIND_NAMES = {0: "leaf", 1: "chain", 2: "branch"}


def show_structure() -> None:
    tree = build_tree(9)
    print("Rank tree for n = 9 (pre-order ids, children in brackets):")
    for p in range(9):
        kids = [int(c) for c in (tree.left[p], tree.right[p]) if c >= 0]
        indent = "  " * tree.level[p]
        print(f"  {indent}rank {p}: {KIND_NAMES[tree.kind[p]]}"
              f"{' -> ' + str(kids) if kids else ''}")
    print(f"Signal line length defaults to k = {default_k(9)} for n = 9, "
          f"k = {default_k(2048)} for n = 2048.")
    print()


def root_influx(n: int, seed: int) -> None:
    tree = build_tree(n)
    proto = make_tree(n)
    rng = Rng(seed)
    config = gen_initial(parse_init("uniform:0", proto), proto, rng)
    expected = dispersion_oracle(tree, n)
    print(f"All {n} agents start on the root:")
    stats = run_until_silent(config, proto, rng, 10**9)
    assert stats.silent
    ranks = config.counts[:n]
    print(f"  silent after {stats.parallel_time:.0f} parallel time")
    print(f"  one agent per rank: {bool(np.all(ranks == 1))}, matches the "
          f"downward-flow oracle: {np.array_equal(ranks, expected)}")
    print(f"  surviving signals: {int(config.counts[n:].sum())}")
    print()


def overload_reset(seed: int) -> None:
    n = 3
    proto = make_tree(n, k=2)
    counts = np.zeros(proto.num_states, dtype=np.int64)
    counts[1] = 2
    config = Configuration.from_counts(counts)
    tree = build_tree(n)
    print("Overloaded start: two agents stuck on leaf rank 1 of a 3-chain.")
    print(f"  classified as {classify_load(config, tree)!r} "
          f"(dispersal alone cannot fix it)")
    rng = Rng(seed)
    stats = run_until_silent(config, proto, rng, 10**7)
    assert stats.silent
    print(f"  signals escalate and reset the pair; final rank occupancy "
          f"{config.counts[:n].tolist()}")
    print()


def near_linear_scaling() -> None:
    print("Median settling time from random starts (7 trials each):")
    for n in (256, 1024):
        proto = make_tree(n)
        times = [
            run_single(proto, "tree", "random",
                       trial_seed(4, n, t)).parallel_time
            for t in range(7)
        ]
        med = float(np.median(times))
        print(f"  n = {n:5d}   median parallel time {med:8.0f}   "
              f"per n*log2(n): {med / (n * np.log2(n)):.2f}")
    print()


def main() -> None:
    show_structure()
    root_influx(33, seed=5)
    overload_reset(seed=6)
    near_linear_scaling()
    print("Takeaway: dispersal solves balanced loads outright, and the")
    print("signal line catches the rare stuck overloads, so settling time")
    print("stays near-linear in n.")


if __name__ == "__main__":
    main()
