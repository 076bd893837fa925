"""Rare-event Monte-Carlo estimation for dynamic fault trees.

The package splits into:

- :mod:`dftmc.distributions` lifetime laws and reference-scale solving
- :mod:`dftmc.tree`          fault-tree model and failure-time semantics
- :mod:`dftmc.parser`        the ``.dft`` text format
- :mod:`dftmc.engine`        sampling, weighting, the d search, estimation
- :mod:`dftmc.oracle`        independent ground-truth calculators
- :mod:`dftmc.cli`           the ``dftmc`` command
"""

__version__ = "0.1.0"

from .distributions import (
    Exponential,
    LogNormal,
    Normal,
    ReferenceDistribution,
    ReferenceSolverError,
    Weibull,
    scale,
    solve_reference,
)
from .engine import (
    Estimate,
    ReferenceModel,
    RunConfig,
    SearchError,
    SearchTrace,
    estimate_top,
    select_reference,
)
from .parser import ParseError, TreeDocument, parse, serialize, to_fault_tree
from .tree import (
    BasicEvent,
    FaultTree,
    Gate,
    GateKind,
    ValidationError,
    eval_gate,
    top_time,
    validate,
)

__all__ = [
    "__version__",
    "Exponential",
    "Weibull",
    "LogNormal",
    "Normal",
    "ReferenceDistribution",
    "ReferenceSolverError",
    "scale",
    "solve_reference",
    "BasicEvent",
    "Gate",
    "GateKind",
    "FaultTree",
    "ValidationError",
    "validate",
    "eval_gate",
    "top_time",
    "TreeDocument",
    "ParseError",
    "parse",
    "serialize",
    "to_fault_tree",
    "RunConfig",
    "ReferenceModel",
    "SearchTrace",
    "SearchError",
    "Estimate",
    "select_reference",
    "estimate_top",
]
