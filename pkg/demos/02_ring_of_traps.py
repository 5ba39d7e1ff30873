"""Ranking on a ring of traps: local sorting plus global dispatch.

The n rank states are grouped into m traps arranged in a ring.  Each trap
has a gate (its lowest state) and a stack of inner states.  Two agents on
the same inner state push one of them a step down; two agents on a gate
split up: one jumps to the top of its own trap, the other moves to the
next trap's gate.  Crowds therefore drain downwards inside a trap and
surplus hops around the ring until it finds a trap with room, which is
why a single missing rank is found much faster than on the plain cycle.

Run with: python demos/02_ring_of_traps.py
"""

from __future__ import annotations

import numpy as np

from poprank.engine import gen_initial, parse_init, run_until_silent
from poprank.harness import build_protocol, run_single, trial_seed
from poprank.protocols.generic import make_generic
from poprank.protocols.ring import build_ring, is_tidy, make_ring, trap_status
from poprank.rng import Rng


def show_layout() -> None:
    layout = build_ring(14)
    print(f"Layout for n = 14: m = {layout.m} traps, "
          f"sizes {layout.trap_sizes} (gate + inner states each):")
    for a in range(layout.m):
        ids = [layout.state_id(a, b) for b in range(layout.trap_sizes[a])]
        print(f"  trap {a}: gate state {ids[0]}, inner states {ids[1:]}")
    print()


def show_rules() -> None:
    layout = build_ring(12)
    proto = make_ring(12)
    inner = layout.state_id(1, 2)
    gate = layout.state_id(1, 0)
    print("The two reaction families (n = 12, trap sizes (4, 4, 4)):")
    print(f"  inner state {inner} doubled  -> {proto.delta(inner, inner)}"
          f"   (one agent steps down)")
    print(f"  gate state {gate} doubled  -> {proto.delta(gate, gate)}"
          f"   (own trap top, next trap's gate)")
    print()


def one_recovery(seed: int) -> None:
    proto = make_ring(12)
    layout = build_ring(12)
    rng = Rng(seed)
    config = gen_initial(parse_init("kdist:2", proto), proto, rng)
    print("Recovery run, n = 12, two ranks initially unoccupied:")

    def describe(label: str) -> None:
        parts = []
        for a in range(layout.m):
            st = trap_status(config, layout, a)
            parts.append(f"trap {a}: {st.occupants} agents, {st.gaps} gaps")
        tidy = "tidy" if is_tidy(config, layout) else "untidy"
        print(f"  {label}: {'; '.join(parts)} ({tidy})")

    describe("before")
    stats = run_until_silent(config, proto, rng, 10**9)
    assert stats.silent
    describe("after ")
    print(f"  one agent per rank: {bool(np.all(config.counts == 1))}, "
          f"parallel time {stats.parallel_time:.0f}")
    print()


def single_gap_race() -> None:
    n = 552
    trials = 7
    print(f"Single missing rank at n = {n}: ring versus plain cycle "
          f"({trials} trials each):")
    ring = build_protocol("ring", 23)
    generic = make_generic(n)
    assert ring.population == n
    ring_times = [
        run_single(ring, "ring", "kdist:1", trial_seed(2, 23, t)).parallel_time
        for t in range(trials)
    ]
    gen_times = [
        run_single(generic, "generic", "kdist:1",
                   trial_seed(3, n, t)).parallel_time
        for t in range(trials)
    ]
    rm = float(np.median(ring_times))
    gm = float(np.median(gen_times))
    print(f"  ring of traps : median parallel time {rm:8.0f}")
    print(f"  plain cycle   : median parallel time {gm:8.0f}")
    print(f"  speedup: {gm / rm:.1f}x")
    print()


def main() -> None:
    show_layout()
    show_rules()
    one_recovery(seed=11)
    single_gap_race()
    print("Takeaway: traps keep reshuffling local, so filling a gap no longer")
    print("needs a collision pair to random-walk across the whole rank space.")


if __name__ == "__main__":
    main()
