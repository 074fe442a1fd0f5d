"""Integrality gaps between max-cut type programs and their elliptope relaxation."""

__version__ = "0.1.0"

from .constants import (
    GapReport,
    cliqueweb_gap,
    hypermetric_gap,
    ip_bruteforce,
    kappa_circuit,
    kappa_k5_minor_free,
    kappa_ratio,
    maxcut,
)
from .cutpoly import (
    CutVector,
    LinearInequality,
    circuit_inequality,
    cliqueweb_inequality,
    cut_dilation_membership,
    hypermetric_inequality,
    met_membership,
    switch,
    triangle_inequality,
)
from .errors import GuardExceeded, InapplicableTheorem, InvalidInput, UndefinedRatio
from .graph import Circuit, Graph, cliqueweb_support, complete_graph, cycle_graph, load_graph, parse_family
from .sdp import solve_cliqueweb_reduced, solve_elliptope_max

__all__ = [
    "__version__",
    "Graph",
    "Circuit",
    "load_graph",
    "parse_family",
    "complete_graph",
    "cycle_graph",
    "cliqueweb_support",
    "CutVector",
    "LinearInequality",
    "triangle_inequality",
    "circuit_inequality",
    "hypermetric_inequality",
    "cliqueweb_inequality",
    "switch",
    "met_membership",
    "cut_dilation_membership",
    "solve_elliptope_max",
    "solve_cliqueweb_reduced",
    "ip_bruteforce",
    "maxcut",
    "kappa_ratio",
    "kappa_circuit",
    "kappa_k5_minor_free",
    "cliqueweb_gap",
    "hypermetric_gap",
    "GapReport",
    "InvalidInput",
    "GuardExceeded",
    "InapplicableTheorem",
    "UndefinedRatio",
]
