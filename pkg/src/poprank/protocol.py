"""Protocol descriptor: transition function, state-space layout, encodings.

A protocol is a pure transition function ``delta(s1, s2) -> (t1, t2)`` over
ordered pairs of integer state identifiers, together with bookkeeping that
the engine and the file formats need:

* states ``0 .. num_ranks-1`` are rank states (the target is one agent per
  rank); states ``num_ranks .. num_states-1`` are auxiliary extra states,
* a canonical population size (for ranking protocols, one agent per rank),
* a text encoding per state plus an optional layout header line, so explicit
  configurations round-trip through plain text files.

Transition tables are stored sparse-by-structure.  Every protocol in this
package is identity on ordered pairs of two *different* rank states, so the
full S x S table is redundant; it suffices to tabulate the diagonal plus the
rows and columns that involve extra states.  ``full_tables`` materialises
the dense table for small state spaces; tests use it to verify that the
sparse form misses nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np


@dataclass
class SparseTables:
    """Tabulated transitions: diagonal plus extra-state rows and columns.

    ``diag1[s], diag2[s]`` are the images of the pair ``(s, s)``;
    ``diag_active[s]`` marks diagonals that change something.  ``xrow*[e, s]``
    covers pairs ``(extra e, any s)`` and ``xcol*[s, e]`` covers
    ``(rank s, extra e)``, with ``e`` counted from ``num_ranks``.
    """

    diag1: np.ndarray
    diag2: np.ndarray
    diag_active: np.ndarray
    xrow1: np.ndarray
    xrow2: np.ndarray
    xcol1: np.ndarray
    xcol2: np.ndarray


@dataclass
class Protocol:
    """A named transition function plus its state-space layout."""

    name: str
    num_ranks: int
    num_extra: int
    population: int
    delta: Callable[[int, int], tuple[int, int]]
    layout: object | None = None
    encode_state: Callable[[int], str] | None = None
    decode_state: Callable[[str], int] | None = None
    header: str | None = None
    _tables: SparseTables | None = field(default=None, repr=False, compare=False)

    @property
    def num_states(self) -> int:
        return self.num_ranks + self.num_extra

    def is_extra(self, state: int) -> bool:
        return state >= self.num_ranks

    def encode(self, state: int) -> str:
        if self.encode_state is not None:
            return self.encode_state(state)
        return str(state)

    def decode(self, token: str) -> int:
        if self.decode_state is not None:
            return self.decode_state(token)
        state = int(token)
        if not 0 <= state < self.num_states:
            raise ValueError(f"state {state} out of range for {self.name}")
        return state

    def tables(self) -> SparseTables:
        """Build (once) and return the sparse transition tables."""
        if self._tables is None:
            self._tables = build_sparse_tables(self)
        return self._tables


def build_sparse_tables(protocol: Protocol) -> SparseTables:
    nr = protocol.num_ranks
    ne = protocol.num_extra
    ns = protocol.num_states
    delta = protocol.delta

    diag1 = np.empty(ns, dtype=np.int32)
    diag2 = np.empty(ns, dtype=np.int32)
    for s in range(ns):
        t1, t2 = delta(s, s)
        diag1[s] = t1
        diag2[s] = t2
    diag_active = (diag1 != np.arange(ns, dtype=np.int32)) | (
        diag2 != np.arange(ns, dtype=np.int32)
    )

    xrow1 = np.empty((ne, ns), dtype=np.int32)
    xrow2 = np.empty((ne, ns), dtype=np.int32)
    xcol1 = np.empty((ns, ne), dtype=np.int32)
    xcol2 = np.empty((ns, ne), dtype=np.int32)
    for e in range(ne):
        se = nr + e
        for s in range(ns):
            t1, t2 = delta(se, s)
            xrow1[e, s] = t1
            xrow2[e, s] = t2
            t1, t2 = delta(s, se)
            xcol1[s, e] = t1
            xcol2[s, e] = t2
    return SparseTables(diag1, diag2, diag_active, xrow1, xrow2, xcol1, xcol2)


def full_tables(protocol: Protocol) -> tuple[np.ndarray, np.ndarray]:
    """Dense S x S transition tables, for small state spaces and tests."""
    ns = protocol.num_states
    if ns > 4096:
        raise ValueError(f"state space too large for dense tables: {ns}")
    t1 = np.empty((ns, ns), dtype=np.int32)
    t2 = np.empty((ns, ns), dtype=np.int32)
    for a in range(ns):
        for b in range(ns):
            r1, r2 = protocol.delta(a, b)
            t1[a, b] = r1
            t2[a, b] = r2
    return t1, t2


def write_config_file(path: str | Path, states, protocol: Protocol) -> None:
    """Write one encoded state per line, preceded by the layout header."""
    lines = []
    if protocol.header is not None:
        lines.append(protocol.header)
    lines.extend(protocol.encode(int(s)) for s in states)
    Path(path).write_text("\n".join(lines) + "\n")


def read_config_file(path: str | Path, protocol: Protocol) -> list[int]:
    """Read a configuration file; validates the header against the layout."""
    raw = [ln.strip() for ln in Path(path).read_text().splitlines()]
    rows = [ln for ln in raw if ln]
    if protocol.header is not None:
        if not rows:
            raise ValueError(f"{path}: empty file, expected header {protocol.header!r}")
        if rows[0] != protocol.header:
            raise ValueError(
                f"{path}: header {rows[0]!r} does not match protocol "
                f"layout {protocol.header!r}"
            )
        rows = rows[1:]
    return [protocol.decode(tok) for tok in rows]
