"""Baseline ranking protocol: one rule family on a cycle of n states.

States are 0..n-1.  When two agents in the same state i meet, the responder
moves to (i+1) mod n; every other ordered pair is identity.  The unique
silent configuration with n agents is the full ranking (one agent per
state), reached in quadratic parallel time.
"""

from __future__ import annotations

from ..protocol import Protocol


def delta(s1: int, s2: int, n: int) -> tuple[int, int]:
    """Transition function: i+i -> i, (i+1 mod n); identity otherwise."""
    if not (0 <= s1 < n and 0 <= s2 < n):
        raise ValueError(f"states ({s1}, {s2}) out of range for n={n}")
    if s1 == s2:
        return s1, (s1 + 1) % n
    return s1, s2


def make_generic(n: int) -> Protocol:
    """Protocol instance with n states and canonical population n."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")

    def _delta(s1: int, s2: int) -> tuple[int, int]:
        return delta(s1, s2, n)

    return Protocol(
        name="generic",
        num_ranks=n,
        num_extra=0,
        population=n,
        delta=_delta,
        layout=None,
        header=None,
    )
