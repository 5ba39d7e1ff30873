"""Protocol constructors for the four self-stabilising ranking schemes."""

from .generic import make_generic
from .line import (
    LineLayout,
    LineVectors,
    RoutingGraph,
    build_line_layout,
    build_routing_graph,
    line_vectors,
    make_isolated_line,
    make_line,
    silent_line_outcome,
)
from .ring import RingLayout, build_ring, is_tidy, make_ring, trap_status
from .tree import RankTree, build_tree, classify_load, disperse, dispersion_oracle, make_tree

__all__ = [
    "LineLayout",
    "LineVectors",
    "RankTree",
    "RingLayout",
    "RoutingGraph",
    "build_line_layout",
    "build_ring",
    "build_routing_graph",
    "build_tree",
    "classify_load",
    "disperse",
    "dispersion_oracle",
    "is_tidy",
    "line_vectors",
    "make_generic",
    "make_isolated_line",
    "make_line",
    "make_ring",
    "make_tree",
    "silent_line_outcome",
    "trap_status",
]
