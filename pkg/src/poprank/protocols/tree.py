"""Ranking via a perfectly balanced tree of ranks plus a reset line.

The n rank states form a binary tree in pre-order: a subtree of odd size k
has a branching root with two subtrees of size (k-1)/2; an even size gives
a non-branching root whose single child subtree has size k-1; size 1 is a
leaf.  Children of a pre-order node p are p+1 (and p+l+1 with l the left
subtree size, when branching).  The height is at most 2 log2 n.

Extra states X_1..X_{2k} form the reset line; indexes 1..k are red, k+1..2k
green.  Rules:

* R1 (doubled rank p): non-branching sends the responder to p+1; branching
  sends the pair to the two children.
* R2 (doubled leaf): both agents to X_1 (overload detected).
* R3 (X_i meets X_j, i <= j, i < 2k): both advance to X_{i+1}.
* R4 (X_i meets a rank agent): red (i <= k) resets both to X_1; green
  (i > k) releases the initiator to the root, rank agent unchanged.
* R5 (doubled X_{2k}): both released to the root.

k defaults to 4*ceil(log2 n), floored at 1.  Text encoding: decimal rank
or ``X<i>``, with layout header line ``tree n=<n> k=<k>``.

``disperse`` is the deterministic downward-flow oracle for the R1-only
dynamics: a node keeps what fits (one agent, or count mod 2 on a branching
node with the rest split evenly; leaves keep everything), processing nodes
in pre-order.  The flow is downward only and the firing order does not
affect the outcome, so this computes the unique final distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from ..engine import Configuration
from ..protocol import Protocol

KIND_LEAF = 0
KIND_CHAIN = 1
KIND_BRANCH = 2


@dataclass(frozen=True)
class RankTree:
    """Perfectly balanced rank tree in pre-order identifiers."""

    n: int
    kind: np.ndarray  # int8, KIND_* per node
    left: np.ndarray  # int32, first child or -1
    right: np.ndarray  # int32, second child or -1
    level: np.ndarray  # int32, root is 0
    subtree: np.ndarray  # int32, subtree sizes

    @property
    def height(self) -> int:
        return int(self.level.max())

    def children(self, p: int) -> tuple[int, ...]:
        out = []
        if self.left[p] >= 0:
            out.append(int(self.left[p]))
        if self.right[p] >= 0:
            out.append(int(self.right[p]))
        return tuple(out)


def build_tree(n: int) -> RankTree:
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    kind = np.empty(n, dtype=np.int8)
    left = np.full(n, -1, dtype=np.int32)
    right = np.full(n, -1, dtype=np.int32)
    level = np.zeros(n, dtype=np.int32)
    subtree = np.zeros(n, dtype=np.int32)
    stack = [(0, n, 0)]
    while stack:
        p, size, lev = stack.pop()
        level[p] = lev
        subtree[p] = size
        if size == 1:
            kind[p] = KIND_LEAF
        elif size % 2 == 0:
            kind[p] = KIND_CHAIN
            left[p] = p + 1
            stack.append((p + 1, size - 1, lev + 1))
        else:
            kind[p] = KIND_BRANCH
            half = (size - 1) // 2
            left[p] = p + 1
            right[p] = p + half + 1
            stack.append((p + 1, half, lev + 1))
            stack.append((p + half + 1, half, lev + 1))
    return RankTree(n=n, kind=kind, left=left, right=right, level=level, subtree=subtree)


def default_k(n: int) -> int:
    """Reset-line length: 4*ceil(log2 n), at least 1."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return max(1, 4 * max(0, (n - 1).bit_length()))


def delta(s1: int, s2: int, tree: RankTree, k: int) -> tuple[int, int]:
    """Transition function; extra state X_i has identifier n + i - 1."""
    n = tree.n
    ns = n + 2 * k
    if not (0 <= s1 < ns and 0 <= s2 < ns):
        raise ValueError(f"states ({s1}, {s2}) out of range for n={n}, k={k}")
    if s1 < n and s2 < n:
        if s1 != s2:
            return s1, s2
        p = s1
        if tree.kind[p] == KIND_LEAF:
            return n, n  # R2: overload, both to X_1
        if tree.kind[p] == KIND_CHAIN:
            return p, int(tree.left[p])  # R1
        return int(tree.left[p]), int(tree.right[p])  # R1
    if s1 >= n and s2 >= n:
        i = s1 - n + 1
        j = s2 - n + 1
        if i == 2 * k and j == 2 * k:
            return 0, 0  # R5
        if i <= j and i < 2 * k:
            return n + i, n + i  # R3: both to X_{i+1}
        return s1, s2
    if s1 >= n:
        i = s1 - n + 1
        if i <= k:
            return n, n  # R4 red: reset both
        return 0, s2  # R4 green: release initiator to the root
    return s1, s2  # rank initiator, extra responder: unmatched


def make_tree(n: int, k: int | None = None) -> Protocol:
    tree = build_tree(n)
    if k is None:
        k = default_k(n)
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")

    def _delta(s1: int, s2: int) -> tuple[int, int]:
        return delta(s1, s2, tree, k)

    def _encode(state: int) -> str:
        if state < n:
            return str(state)
        return f"X{state - n + 1}"

    def _decode(token: str) -> int:
        if token.startswith("X"):
            i = int(token[1:])
            if not 1 <= i <= 2 * k:
                raise ValueError(f"extra state index {i} out of range [1, {2 * k}]")
            return n + i - 1
        state = int(token)
        if not 0 <= state < n:
            raise ValueError(f"rank {state} out of range [0, {n})")
        return state

    return Protocol(
        name="tree",
        num_ranks=n,
        num_extra=2 * k,
        population=n,
        delta=_delta,
        layout=tree,
        encode_state=_encode,
        decode_state=_decode,
        header=f"tree n={n} k={k}",
    )


def disperse(tree: RankTree, counts) -> np.ndarray:
    """Final distribution of the downward-flow dynamics from given counts.

    Processing in pre-order (parents before children, which identifier
    order guarantees): a leaf keeps everything it receives; a
    non-branching node keeps one agent and passes the rest down; a
    branching node keeps its count mod 2 (or a single agent) and splits
    the rest evenly between its children.
    """
    c = np.asarray(counts, dtype=np.int64)
    if c.shape != (tree.n,) or c.min() < 0:
        raise ValueError(f"counts must be a non-negative vector of length {tree.n}")
    acc = c.copy()
    out = np.zeros(tree.n, dtype=np.int64)
    for p in range(tree.n):
        total = int(acc[p])
        if tree.kind[p] == KIND_LEAF:
            out[p] = total
        elif tree.kind[p] == KIND_CHAIN:
            keep = min(total, 1)
            out[p] = keep
            acc[tree.left[p]] += total - keep
        else:
            if total <= 1:
                out[p] = total
            else:
                out[p] = total % 2
                acc[tree.left[p]] += total // 2
                acc[tree.right[p]] += total // 2
    return out


def dispersion_oracle(tree: RankTree, root_arrivals: int) -> np.ndarray:
    """Final distribution when root_arrivals agents all start at the root."""
    if root_arrivals < 0:
        raise ValueError(f"root_arrivals must be non-negative, got {root_arrivals}")
    counts = np.zeros(tree.n, dtype=np.int64)
    counts[0] = root_arrivals
    return disperse(tree, counts)


def classify_load(
    config: Union[Configuration, np.ndarray], tree: RankTree
) -> Literal["balanced", "overloaded"]:
    """Would the downward flow overload a leaf (two or more agents on it)?

    Accepts a configuration (restricted to its rank states) or a raw count
    vector.  Only leaves can end above one agent, so the verdict reads off
    the dispersed leaf counts.
    """
    if isinstance(config, Configuration):
        counts = config.counts[: tree.n]
    else:
        counts = config
    final = disperse(tree, counts)
    leaves = final[np.asarray(tree.kind) == KIND_LEAF]
    return "overloaded" if bool((leaves >= 2).any()) else "balanced"
