"""Sandboxed expression language for function nodes.

Total by construction: no loops, no recursion, no I/O. Programs are parsed,
type-checked against the port schemas of their graph context, and evaluated
deterministically.
"""

from .interp import EvalError, evaluate
from .nodes import BUILTINS, KEYWORDS, Expr
from .parser import ParseError, parse, pretty
from .skeleton import generate_skeleton, placeholder
from .types import (
    InferenceResult,
    TypeDiagnostic,
    TypedProgram,
    infer_type,
    schema_to_type,
    type_subtype,
    type_to_schema,
)

__all__ = [
    "BUILTINS",
    "KEYWORDS",
    "EvalError",
    "Expr",
    "InferenceResult",
    "ParseError",
    "TypeDiagnostic",
    "TypedProgram",
    "evaluate",
    "generate_skeleton",
    "infer_type",
    "parse",
    "placeholder",
    "pretty",
    "schema_to_type",
    "type_subtype",
    "type_to_schema",
]
