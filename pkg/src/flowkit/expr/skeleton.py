"""Skeleton source generation from a port signature.

The generated program binds each top-level input field to a let (optional
fields through coalesce) and returns a placeholder literal shaped like the
expected output. It always parses and type-checks cleanly against the pair
it was generated for.
"""

from __future__ import annotations

import re
from typing import Optional

from ..schema import SchemaDoc
from .nodes import BUILTINS, KEYWORDS, ArrLit, Call, Expr, FieldAccess, Let, Lit, ObjLit, Var
from .parser import pretty

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _bindable(name: str) -> bool:
    return bool(_IDENT.match(name)) and name not in KEYWORDS and name not in BUILTINS and name != "msg"


def placeholder(schema: Optional[SchemaDoc]) -> Expr:
    """A literal of the output shape: 0 / "" / false / [] / full object literal."""
    if schema is None:
        return Lit(False)
    kind = schema.kind
    if kind == "boolean":
        return Lit(False)
    if kind == "integer":
        return Lit(0)
    if kind == "number":
        return Lit(0)
    if kind == "string":
        return Lit(schema.enum[0] if schema.enum else "")
    if kind == "array":
        return ArrLit(())
    if kind == "object":
        return ObjLit(
            tuple((name, placeholder(schema.properties[name])) for name in sorted(schema.properties or {}))
        )
    if kind == "union":
        return placeholder(schema.arms[0])
    raise TypeError(f"unhandled kind {kind}")  # pragma: no cover


def generate_skeleton(input_schema: Optional[SchemaDoc], output_schema: Optional[SchemaDoc]) -> str:
    """Source text for a fresh function node body."""
    body: Expr = placeholder(output_schema)
    if input_schema is not None and input_schema.kind == "object":
        required = input_schema.required or frozenset()
        for name in sorted(input_schema.properties or {}, reverse=True):
            if not _bindable(name):
                continue
            access: Expr = FieldAccess(Var("msg"), name)
            if name not in required:
                access = Call("coalesce", (access, placeholder(input_schema.properties[name])))
            body = Let(name, access, body)
    return pretty(body)
