"""Interval-probability knowledge bases with local bounds propagation.

Store rules that bound conditional probabilities, declare conditional
independences, saturate the base to a fixpoint under sound inference
rules, and cross-check every derived bound against explicit joint
distributions on small instances.
"""

from .core import (
    BidirRule,
    ConjEvent,
    ContradictionError,
    EMPTY,
    FULL,
    Independence,
    KbError,
    Literal,
    ProbInterval,
    UncertainRule,
    ValidationError,
    canonicalize,
    conjoin,
    event,
    interval_meet,
)
from .engine import (
    ConsistencyResult,
    DerivationTrace,
    InconsistencyError,
    InconsistencyReport,
    KnowledgeBase,
    SaturationConfig,
    SaturationResult,
    TraceNode,
    UnknownSymbolError,
    check_consistency,
    query,
    saturate,
)
from .kbformat import KbDocument, ParseError, Query, parse_kb, parse_query_expr, serialize
from .oracle import (
    JointModel,
    OracleReport,
    estimate_range,
    eval_conditional,
    random_kb_from_model,
    satisfies,
)

__version__ = "0.1.0"

__all__ = [
    "BidirRule",
    "ConjEvent",
    "ConsistencyResult",
    "ContradictionError",
    "DerivationTrace",
    "EMPTY",
    "FULL",
    "Independence",
    "InconsistencyError",
    "InconsistencyReport",
    "JointModel",
    "KbDocument",
    "KbError",
    "KnowledgeBase",
    "Literal",
    "OracleReport",
    "ParseError",
    "ProbInterval",
    "Query",
    "SaturationConfig",
    "SaturationResult",
    "TraceNode",
    "UncertainRule",
    "UnknownSymbolError",
    "ValidationError",
    "canonicalize",
    "check_consistency",
    "conjoin",
    "estimate_range",
    "eval_conditional",
    "event",
    "interval_meet",
    "parse_kb",
    "parse_query_expr",
    "query",
    "random_kb_from_model",
    "satisfies",
    "saturate",
    "serialize",
]
