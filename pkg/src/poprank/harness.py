"""Experiment harness: seeded trial batches, scaling fits, CSV persistence.

A sweep runs ``trials`` independent runs at each size of a protocol family
and records one row per run.  Sizes mean the population n for the generic
and tree protocols and the trap parameter m for the ring (n = m(m+1)) and
line (n = 3 m^3 (m+1)) protocols; the record always carries the resulting
population in its ``n`` column and the trap parameter, when there is one,
in ``m``.

Per-trial seeds are seed_base xor mix(size, trial) with a fixed 64-bit
mixing function, so any single trial can be reproduced in isolation and
adding sizes or trials never shifts the seeds of existing ones.

Budgets are expressed in parallel time (interactions / n).  Defaults per
family: 50 n^2 for generic and ring, 50 n^(7/4) log2(n)^2 for line,
200 n log2(n) for tree.

The scaling statistic is the median parallel time per size;
``fit_exponent`` least-squares fits log(median) against log(n) and refuses
to fit records that did not reach silence.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import gen_initial, parse_init, run_until_silent
from .oracles import validate_ranking
from .protocol import Protocol
from .protocols import make_generic, make_line, make_ring, make_tree
from .rng import Rng, stable_mix

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "protocol",
    "n",
    "m",
    "init",
    "seed",
    "silent",
    "interactions",
    "parallel_time",
    "valid",
)


@dataclass(frozen=True)
class TrialRecord:
    """One run: identity, outcome, and validity.

    ``interactions`` is the interactions-at-last-change count (the silence
    measure); ``parallel_time`` is that divided by n.  ``m`` is None for
    families without a trap parameter.
    """

    protocol: str
    n: int
    m: int | None
    init: str
    seed: int
    silent: bool
    interactions: int
    parallel_time: float
    valid: bool


@dataclass(frozen=True)
class SweepSpec:
    """A batch of trials: one protocol family, several sizes.

    ``k`` overrides the tree protocol's reset-line length and is ignored
    by the other families.
    """

    protocol: str
    sizes: tuple[int, ...]
    trials: int
    init: str = "random"
    seed_base: int = 0
    budget: float | None = None
    k: int | None = None

    def __post_init__(self):
        if self.protocol not in ("generic", "ring", "line", "tree"):
            raise ValueError(f"unknown protocol family: {self.protocol!r}")
        if not self.sizes:
            raise ValueError("sizes must be non-empty")
        if list(self.sizes) != sorted(set(self.sizes)):
            raise ValueError("sizes must be strictly increasing")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.budget is not None and self.budget <= 0:
            raise ValueError(f"budget must be positive, got {self.budget}")


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of log(median parallel time) vs log(n)."""

    exponent: float
    intercept: float
    r_squared: float
    medians: tuple[tuple[int, float], ...]


def build_protocol(family: str, size: int, k: int | None = None) -> Protocol:
    """Instantiate a family member; ``size`` is n or the trap parameter m."""
    if family == "generic":
        return make_generic(size)
    if family == "ring":
        return make_ring(size * (size + 1))
    if family == "line":
        return make_line(size)
    if family == "tree":
        return make_tree(size, k)
    raise ValueError(f"unknown protocol family: {family!r}")


def default_budget(family: str, n: int) -> float:
    """Parallel-time budget for one run of a family at population n."""
    if family in ("generic", "ring"):
        return 50.0 * n * n
    if family == "line":
        return 50.0 * n ** 1.75 * math.log2(n) ** 2
    if family == "tree":
        return 200.0 * n * math.log2(max(2, n))
    raise ValueError(f"unknown protocol family: {family!r}")


def trial_seed(seed_base: int, size: int, trial: int) -> int:
    return seed_base ^ stable_mix(size, trial)


def run_single(
    protocol: Protocol,
    family: str,
    init: str,
    seed: int,
    budget: float | None = None,
    m: int | None = None,
) -> TrialRecord:
    """One seeded run from an init descriptor to silence or budget."""
    rng = Rng(seed)
    spec = parse_init(init, protocol)
    config = gen_initial(spec, protocol, rng)
    n = config.n
    if budget is None:
        budget = default_budget(family, n)
    max_interactions = max(1, math.ceil(budget * n))
    stats = run_until_silent(config, protocol, rng, max_interactions)
    verdict = validate_ranking(config, protocol)
    return TrialRecord(
        protocol=family,
        n=n,
        m=m,
        init=init,
        seed=seed,
        silent=stats.silent,
        interactions=stats.interactions_at_last_change,
        parallel_time=stats.parallel_time,
        valid=verdict.valid_ranking,
    )


def run_trials(spec: SweepSpec) -> list[TrialRecord]:
    """All trials of a sweep, ordered by (size, trial index).

    A size that cannot be instantiated (for example an odd m for the line
    family) contributes error records: silent=False, valid=False, zero
    interactions.  The failure is logged, not raised, so one bad size does
    not lose the rest of a sweep.
    """
    records: list[TrialRecord] = []
    for size in spec.sizes:
        try:
            protocol = build_protocol(spec.protocol, size, spec.k)
        except (ValueError, AssertionError) as exc:
            logger.warning("size %s of %s failed to build: %s", size, spec.protocol, exc)
            for trial in range(spec.trials):
                records.append(
                    TrialRecord(
                        protocol=spec.protocol,
                        n=size,
                        m=size if spec.protocol in ("ring", "line") else None,
                        init=spec.init,
                        seed=trial_seed(spec.seed_base, size, trial),
                        silent=False,
                        interactions=0,
                        parallel_time=0.0,
                        valid=False,
                    )
                )
            continue
        m = size if spec.protocol in ("ring", "line") else None
        for trial in range(spec.trials):
            records.append(
                run_single(
                    protocol,
                    spec.protocol,
                    spec.init,
                    trial_seed(spec.seed_base, size, trial),
                    spec.budget,
                    m,
                )
            )
    return records


def medians_by_size(records: list[TrialRecord]) -> list[tuple[int, float]]:
    """Median parallel time per population size, ascending in n."""
    by_n: dict[int, list[float]] = {}
    for rec in records:
        by_n.setdefault(rec.n, []).append(rec.parallel_time)
    return [(n, float(np.median(by_n[n]))) for n in sorted(by_n)]


def fit_exponent(records: list[TrialRecord]) -> FitResult:
    """Fit log(median parallel time) = exponent * log(n) + intercept.

    Refuses records that did not reach silence (their parallel times are
    budget artifacts, not measurements) and needs at least three distinct
    sizes to say anything about a power law.
    """
    not_silent = [rec for rec in records if not rec.silent]
    if not_silent:
        summary = ", ".join(
            f"{rec.protocol} n={rec.n} seed={rec.seed}" for rec in not_silent[:5]
        )
        raise ValueError(
            f"{len(not_silent)} record(s) did not reach silence ({summary}...)"
        )
    med = medians_by_size(records)
    if len(med) < 3:
        raise ValueError(f"need at least 3 distinct sizes, got {len(med)}")
    if any(v <= 0 for _, v in med):
        raise ValueError("median parallel time must be positive to fit logs")
    x = np.log([n for n, _ in med])
    y = np.log([v for _, v in med])
    exponent, intercept = np.polyfit(x, y, 1)
    resid = y - (exponent * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - float((resid**2).sum()) / ss_tot
    return FitResult(
        exponent=float(exponent),
        intercept=float(intercept),
        r_squared=r2,
        medians=tuple(med),
    )


def write_csv(path: str | Path, records: list[TrialRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(
                [
                    rec.protocol,
                    rec.n,
                    "" if rec.m is None else rec.m,
                    rec.init,
                    rec.seed,
                    "true" if rec.silent else "false",
                    rec.interactions,
                    repr(rec.parallel_time),
                    "true" if rec.valid else "false",
                ]
            )


def read_csv(path: str | Path) -> list[TrialRecord]:
    records: list[TrialRecord] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(CSV_COLUMNS):
            raise ValueError(f"{path}: unexpected CSV header {header}")
        for row in reader:
            if not row:
                continue
            records.append(
                TrialRecord(
                    protocol=row[0],
                    n=int(row[1]),
                    m=None if row[2] == "" else int(row[2]),
                    init=row[3],
                    seed=int(row[4]),
                    silent=row[5] == "true",
                    interactions=int(row[6]),
                    parallel_time=float(row[7]),
                    valid=row[8] == "true",
                )
            )
    return records
