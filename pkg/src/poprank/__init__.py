"""Self-stabilising ranking protocols: simulation engine, protocol library,
experiment harness.

n agents, each holding one of n rank states (plus protocol-specific extra
states), interact in uniformly random ordered pairs.  A protocol stabilises
when it reaches a silent configuration, one where no interaction can change
any state; for the protocols here the silent configurations are exactly the
valid rankings, one agent per rank.  The package provides four protocol
families (generic cycle, ring of traps, lines of traps with routing, tree
of ranks with a reset line), deterministic seeded execution, analytic
oracles for their silent outcomes, and a sweep/fit harness for scaling
measurements.
"""

from .engine import (
    Configuration,
    Explicit,
    InitSpec,
    KDistant,
    RandomInit,
    RunStats,
    TransitionResult,
    Uniform,
    describe_init,
    gen_initial,
    is_silent,
    parse_init,
    run_until_silent,
    sample_pair,
    step,
)
from .harness import (
    FitResult,
    SweepSpec,
    TrialRecord,
    build_protocol,
    default_budget,
    fit_exponent,
    medians_by_size,
    read_csv,
    run_single,
    run_trials,
    trial_seed,
    write_csv,
)
from .oracles import Verdict, exhaustive_silence_check, validate_ranking
from .protocol import Protocol, full_tables, read_config_file, write_config_file
from .protocols import (
    build_line_layout,
    build_ring,
    build_routing_graph,
    build_tree,
    classify_load,
    disperse,
    dispersion_oracle,
    is_tidy,
    line_vectors,
    make_generic,
    make_isolated_line,
    make_line,
    make_ring,
    make_tree,
    silent_line_outcome,
    trap_status,
)
from .rng import Rng

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "Explicit",
    "FitResult",
    "InitSpec",
    "KDistant",
    "Protocol",
    "RandomInit",
    "Rng",
    "RunStats",
    "SweepSpec",
    "TransitionResult",
    "TrialRecord",
    "Uniform",
    "Verdict",
    "build_line_layout",
    "build_protocol",
    "build_ring",
    "build_routing_graph",
    "build_tree",
    "classify_load",
    "default_budget",
    "describe_init",
    "disperse",
    "dispersion_oracle",
    "exhaustive_silence_check",
    "fit_exponent",
    "full_tables",
    "gen_initial",
    "is_silent",
    "is_tidy",
    "line_vectors",
    "make_generic",
    "make_isolated_line",
    "make_line",
    "make_ring",
    "make_tree",
    "medians_by_size",
    "parse_init",
    "read_config_file",
    "read_csv",
    "run_single",
    "run_trials",
    "run_until_silent",
    "sample_pair",
    "silent_line_outcome",
    "step",
    "trap_status",
    "trial_seed",
    "validate_ranking",
    "write_config_file",
    "write_csv",
]
