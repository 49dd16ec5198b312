"""Exact cardinality upper bounds for difference-constraint instances.

Computes and cross-validates the modular, weighted-coverage and polymatroid
bounds with exact rational arithmetic, including the polynomial-time flow
solver for simple instances, the SCC-based fixed-parameter solver, the
constructive dual-witness lift, and bound-preserving hardness reductions.
"""

from .core import (
    AttrSet,
    DifferenceConstraint,
    Instance,
    InstanceClass,
    CapExceededError,
    DcboundError,
    GenerationError,
    LiftError,
    NotSimpleError,
    ParseError,
    ValidationError,
    classify,
    dc,
    dependency_digraph,
    instance,
    parse_instance,
    render_instance,
    scc_decompose,
    unbounded_attrs,
)
from .ratio import Rat, rat

__all__ = [
    "AttrSet",
    "DifferenceConstraint",
    "Instance",
    "InstanceClass",
    "CapExceededError",
    "DcboundError",
    "GenerationError",
    "LiftError",
    "NotSimpleError",
    "ParseError",
    "ValidationError",
    "classify",
    "dc",
    "dependency_digraph",
    "instance",
    "parse_instance",
    "render_instance",
    "scc_decompose",
    "unbounded_attrs",
    "Rat",
    "rat",
]

__version__ = "0.1.0"
