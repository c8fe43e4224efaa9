"""AST for the sandboxed expression language.

Position fields do not participate in equality, so parse(pretty(tree))
compares equal to the original tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Union

BUILTINS = ("len", "abs", "min", "max", "round", "contains", "coalesce")
KEYWORDS = ("let", "in", "if", "then", "else", "true", "false")


@dataclass(frozen=True)
class Lit:
    value: Any  # bool | int | float | str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class FieldAccess:
    base: "Expr"
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Let:
    name: str
    value: "Expr"
    body: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "!"
    operand: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Binary:
    op: str  # arithmetic, comparison, or logical
    left: "Expr"
    right: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Expr", ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ObjLit:
    fields: tuple[tuple[str, "Expr"], ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ArrLit:
    items: tuple["Expr", ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Expr = Union[Lit, Var, FieldAccess, Let, If, Unary, Binary, Call, ObjLit, ArrLit]

# Lower binds looser. Comparisons are non-associative (single use per level).
PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5, "%": 5,
}
UNARY_PRECEDENCE = 6
