"""Jitted interaction loop shared by the engine.

The kernel advances a configuration in place under the uniform random
scheduler until silence is detected or the interaction budget runs out.
Silence detection is two-tier:

* cheap counters maintained per interaction: the number of states whose
  count is >= 2 and whose doubled pair changes something, and the number of
  occupied extra states.  If the first counter is positive the configuration
  is provably not silent, so nothing else needs checking;
* a full scan over occupied states on the check cadence.  The scan relies on
  the structural fact that ordered pairs of two different rank states are
  identity in every protocol here (tests assert it against dense tables), so
  only diagonals and extra-state pairs are examined.

Silence checks consume no random draws, so check timing never perturbs the
interaction stream: a run split into chunks replays the exact same
trajectory as an uninterrupted run with the same seed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .rng import mask_for, randbelow_masked

_U64 = np.uint64


@njit(cache=True, nogil=True)
def silent_scan(counts, diag1, diag2, diag_active, xrow1, xrow2, xcol1, xcol2,
                num_ranks):
    """Exhaustive silence check over occupied states.

    True iff no realizable ordered pair changes state: doubled states need a
    count of at least 2, pairs of distinct occupied states are checked in
    both orders, and rank-rank off-diagonal pairs are identity by protocol
    structure.
    """
    ns = counts.shape[0]
    for s in range(ns):
        if counts[s] >= 2 and diag_active[s]:
            return False
    for e in range(num_ranks, ns):
        if counts[e] > 0:
            er = e - num_ranks
            for s in range(ns):
                if counts[s] > 0 and (s != e or counts[e] >= 2):
                    if xrow1[er, s] != e or xrow2[er, s] != s:
                        return False
                    if s < num_ranks:
                        if xcol1[s, er] != s or xcol2[s, er] != e:
                            return False
    return True


@njit(cache=True, nogil=True)
def run_kernel(agents, counts, diag1, diag2, diag_active, xrow1, xrow2,
               xcol1, xcol2, num_ranks, rng_state, max_interactions, cadence):
    """Run interactions until detected silence or budget exhaustion.

    Returns (interactions_total, interactions_at_last_change, silent).
    Mutates agents, counts and rng_state in place.
    """
    n = np.int64(agents.shape[0])
    un = _U64(n)
    mask = mask_for(un)
    ns = counts.shape[0]

    n_active = 0
    n_extra_occ = 0
    for s in range(ns):
        if counts[s] >= 2 and diag_active[s]:
            n_active += 1
        if s >= num_ranks and counts[s] > 0:
            n_extra_occ += 1

    interactions = np.int64(0)
    last_change = np.int64(0)
    while interactions < max_interactions:
        i = randbelow_masked(rng_state, un, mask)
        j = randbelow_masked(rng_state, un, mask)
        while i == j:
            i = randbelow_masked(rng_state, un, mask)
            j = randbelow_masked(rng_state, un, mask)
        interactions += 1

        s1 = agents[i]
        s2 = agents[j]
        t1 = s1
        t2 = s2
        changed = False
        if s1 == s2:
            if diag_active[s1]:
                t1 = diag1[s1]
                t2 = diag2[s1]
                changed = True
        elif s1 >= num_ranks:
            t1 = xrow1[s1 - num_ranks, s2]
            t2 = xrow2[s1 - num_ranks, s2]
            changed = t1 != s1 or t2 != s2
        elif s2 >= num_ranks:
            t1 = xcol1[s1, s2 - num_ranks]
            t2 = xcol2[s1, s2 - num_ranks]
            changed = t1 != s1 or t2 != s2
        # Ordered pairs of two different rank states are identity.

        if changed:
            c = counts[s1]
            counts[s1] = c - 1
            if c == 2 and diag_active[s1]:
                n_active -= 1
            if s1 >= num_ranks and c == 1:
                n_extra_occ -= 1
            c = counts[s2]
            counts[s2] = c - 1
            if c == 2 and diag_active[s2]:
                n_active -= 1
            if s2 >= num_ranks and c == 1:
                n_extra_occ -= 1
            c = counts[t1]
            counts[t1] = c + 1
            if c == 1 and diag_active[t1]:
                n_active += 1
            if t1 >= num_ranks and c == 0:
                n_extra_occ += 1
            c = counts[t2]
            counts[t2] = c + 1
            if c == 1 and diag_active[t2]:
                n_active += 1
            if t2 >= num_ranks and c == 0:
                n_extra_occ += 1
            agents[i] = t1
            agents[j] = t2
            last_change = interactions

        if n_active == 0:
            if interactions % cadence == 0 or interactions - last_change == cadence:
                if silent_scan(counts, diag1, diag2, diag_active, xrow1,
                               xrow2, xcol1, xcol2, num_ranks):
                    return interactions, last_change, True

    silent = silent_scan(counts, diag1, diag2, diag_active, xrow1, xrow2,
                         xcol1, xcol2, num_ranks)
    return interactions, last_change, silent
