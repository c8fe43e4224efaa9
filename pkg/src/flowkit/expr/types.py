"""Expression types, the schema bridge, and type inference.

Types erase numeric ranges and string enums; Int widens implicitly to Num,
never the reverse. Optional object fields must go through coalesce, which
removes null-dereference as a runtime failure class.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

from ..schema import SchemaDoc
from .nodes import (
    ArrLit,
    Binary,
    Call,
    Expr,
    FieldAccess,
    If,
    Let,
    Lit,
    ObjLit,
    Unary,
    Var,
)


@dataclass(frozen=True)
class Prim:
    name: str  # bool int num str


@dataclass(frozen=True)
class Arr:
    item: "ExprType"


@dataclass(frozen=True)
class Obj:
    # (name, type, optional) sorted by name
    fields: tuple[tuple[str, "ExprType", bool], ...]

    def field(self, name: str) -> Optional[tuple["ExprType", bool]]:
        for fname, ftype, opt in self.fields:
            if fname == name:
                return ftype, opt
        return None


@dataclass(frozen=True)
class UnionT:
    arms: tuple["ExprType", ...]


@dataclass(frozen=True)
class Bottom:
    """Empty-domain type of []; subtype of everything."""


@dataclass(frozen=True)
class ErrorT:
    """Recovery type after a diagnostic; unifies with anything to stop cascades."""


ExprType = Any

BOOL = Prim("bool")
INT = Prim("int")
NUM = Prim("num")
STR = Prim("str")


def schema_to_type(schema: SchemaDoc) -> ExprType:
    kind = schema.kind
    if kind == "boolean":
        return BOOL
    if kind == "integer":
        return INT
    if kind == "number":
        return NUM
    if kind == "string":
        return STR
    if kind == "array":
        return Arr(schema_to_type(schema.items))
    if kind == "object":
        fields = tuple(
            (name, schema_to_type(schema.properties[name]), name not in (schema.required or ()))
            for name in sorted(schema.properties or {})
        )
        return Obj(fields)
    if kind == "union":
        return UnionT(tuple(schema_to_type(a) for a in schema.arms))
    raise TypeError(f"unhandled kind {kind}")  # pragma: no cover


def type_to_schema(t: ExprType) -> SchemaDoc:
    if t == BOOL:
        return SchemaDoc.boolean()
    if t == INT:
        return SchemaDoc.integer()
    if t == NUM:
        return SchemaDoc.number()
    if t == STR:
        return SchemaDoc.string()
    if isinstance(t, Arr):
        if isinstance(t.item, Bottom):
            return SchemaDoc.array(SchemaDoc.boolean(), max_len=0)
        return SchemaDoc.array(type_to_schema(t.item))
    if isinstance(t, Obj):
        return SchemaDoc.obj(
            {name: type_to_schema(ftype) for name, ftype, _ in t.fields},
            required=[name for name, _, opt in t.fields if not opt],
        )
    if isinstance(t, UnionT):
        return SchemaDoc.union([type_to_schema(a) for a in t.arms])
    raise TypeError(f"type {t!r} has no schema form")


def type_subtype(a: ExprType, b: ExprType) -> bool:
    if isinstance(a, (Bottom, ErrorT)) or isinstance(b, ErrorT):
        return True
    if isinstance(a, UnionT):
        return all(type_subtype(arm, b) for arm in a.arms)
    if isinstance(b, UnionT):
        return any(type_subtype(a, arm) for arm in b.arms)
    if isinstance(a, Prim) and isinstance(b, Prim):
        return a == b or (a == INT and b == NUM)
    if isinstance(a, Arr) and isinstance(b, Arr):
        return type_subtype(a.item, b.item)
    if isinstance(a, Obj) and isinstance(b, Obj):
        b_fields = {name: (ftype, opt) for name, ftype, opt in b.fields}
        a_fields = {name: (ftype, opt) for name, ftype, opt in a.fields}
        for name, (_, opt) in b_fields.items():
            if not opt and (name not in a_fields or a_fields[name][1]):
                return False
        for name, (ftype, _) in a_fields.items():
            if name not in b_fields or not type_subtype(ftype, b_fields[name][0]):
                return False
        return True
    return False


def type_join(a: ExprType, b: ExprType) -> Optional[ExprType]:
    """Least common type of two branches, or None when incomparable."""
    if type_subtype(a, b):
        return b
    if type_subtype(b, a):
        return a
    return None


def type_name(t: ExprType) -> str:
    if isinstance(t, Prim):
        return t.name
    if isinstance(t, Arr):
        return f"array of {type_name(t.item)}"
    if isinstance(t, Obj):
        return "object{" + ", ".join(n + ("?" if o else "") for n, _, o in t.fields) + "}"
    if isinstance(t, UnionT):
        return " | ".join(type_name(a) for a in t.arms)
    if isinstance(t, Bottom):
        return "empty"
    return "error"


# -- inference ----------------------------------------------------------------------

@dataclass(frozen=True)
class TypeDiagnostic:
    line: int
    col: int
    code: str
    message: str

    def to_json(self) -> dict:
        return {"line": self.line, "col": self.col, "code": self.code, "message": self.message}


@dataclass
class TypedArm:
    """One input-schema arm: the node-type map drives evaluation semantics."""

    input_schema: SchemaDoc
    input_type: ExprType
    node_types: dict[int, ExprType]
    result_type: ExprType


@dataclass
class TypedProgram:
    ast: Expr
    arms: list[TypedArm]
    output_schema: Optional[SchemaDoc]


@dataclass
class InferenceResult:
    typed: Optional[TypedProgram]
    diagnostics: list[TypeDiagnostic]

    @property
    def ok(self) -> bool:
        return not self.diagnostics


_NUMERIC = (INT, NUM)


class _Inferencer:
    def __init__(self) -> None:
        self.diagnostics: list[TypeDiagnostic] = []
        self.types: dict[int, ExprType] = {}

    def fail(self, node: Expr, code: str, message: str) -> ExprType:
        self.diagnostics.append(TypeDiagnostic(node.line, node.col, code, message))
        return ErrorT()

    def note(self, node: Expr, t: ExprType) -> ExprType:
        self.types[id(node)] = t
        return t

    def infer(self, node: Expr, env: dict[str, ExprType]) -> ExprType:
        return self.note(node, self._infer(node, env))

    def _numeric_operand(self, node: Expr, t: ExprType, what: str) -> bool:
        if isinstance(t, ErrorT) or t in _NUMERIC:
            return True
        self.fail(node, "arith-type", f"{what} must be numeric, got {type_name(t)}")
        return False

    def _infer(self, node: Expr, env: dict[str, ExprType]) -> ExprType:
        if isinstance(node, Lit):
            v = node.value
            if isinstance(v, bool):
                return BOOL
            if isinstance(v, int):
                return INT
            if isinstance(v, float):
                return NUM
            return STR
        if isinstance(node, Var):
            if node.name not in env:
                return self.fail(node, "unbound-var", f"unbound name {node.name!r}")
            return env[node.name]
        if isinstance(node, FieldAccess):
            base = self.infer(node.base, env)
            if isinstance(base, ErrorT):
                return base
            if not isinstance(base, Obj):
                return self.fail(node, "not-an-object", f"cannot access field of {type_name(base)}")
            entry = base.field(node.name)
            if entry is None:
                return self.fail(node, "unknown-field", f"no field {node.name!r} in {type_name(base)}")
            ftype, optional = entry
            if optional:
                return self.fail(
                    node,
                    "optional-field-access",
                    f"field {node.name!r} is optional; use coalesce({_field_path(node)}, default)",
                )
            return ftype
        if isinstance(node, Let):
            value = self.infer(node.value, env)
            inner = dict(env)
            inner[node.name] = value
            return self.infer(node.body, inner)
        if isinstance(node, If):
            cond = self.infer(node.cond, env)
            if not isinstance(cond, ErrorT) and cond != BOOL:
                self.fail(node.cond, "cond-not-bool", f"condition must be bool, got {type_name(cond)}")
            then = self.infer(node.then, env)
            orelse = self.infer(node.orelse, env)
            if isinstance(then, ErrorT) or isinstance(orelse, ErrorT):
                return ErrorT()
            joined = type_join(then, orelse)
            if joined is None:
                return self.fail(
                    node, "branch-mismatch",
                    f"branches have incompatible types {type_name(then)} and {type_name(orelse)}",
                )
            return joined
        if isinstance(node, Unary):
            operand = self.infer(node.operand, env)
            if node.op == "!":
                if not isinstance(operand, ErrorT) and operand != BOOL:
                    return self.fail(node, "logic-type", f"! needs bool, got {type_name(operand)}")
                return BOOL
            if not self._numeric_operand(node, operand, "negation operand"):
                return ErrorT()
            return operand if operand in _NUMERIC else ErrorT()
        if isinstance(node, Binary):
            left = self.infer(node.left, env)
            right = self.infer(node.right, env)
            op = node.op
            if op in ("&&", "||"):
                for side, t in ((node.left, left), (node.right, right)):
                    if not isinstance(t, ErrorT) and t != BOOL:
                        self.fail(side, "logic-type", f"{op} needs bool operands, got {type_name(t)}")
                return BOOL
            if op in ("+", "-", "*", "/", "%"):
                ok = self._numeric_operand(node.left, left, f"left operand of {op}")
                ok = self._numeric_operand(node.right, right, f"right operand of {op}") and ok
                if not ok:
                    return ErrorT()
                if isinstance(left, ErrorT) or isinstance(right, ErrorT):
                    return ErrorT()
                return INT if (left == INT and right == INT) else NUM
            if op in ("<", "<=", ">", ">="):
                self._numeric_operand(node.left, left, f"left operand of {op}")
                self._numeric_operand(node.right, right, f"right operand of {op}")
                return BOOL
            if op in ("==", "!="):
                if not isinstance(left, ErrorT) and not isinstance(right, ErrorT):
                    if type_join(left, right) is None:
                        self.fail(node, "cmp-type",
                                  f"cannot compare {type_name(left)} with {type_name(right)}")
                return BOOL
            return self.fail(node, "unknown-op", f"unknown operator {op!r}")  # pragma: no cover
        if isinstance(node, Call):
            return self._infer_call(node, env)
        if isinstance(node, ObjLit):
            fields = []
            for name, value in node.fields:
                fields.append((name, self.infer(value, env), False))
            fields.sort(key=lambda f: f[0])
            if any(isinstance(t, ErrorT) for _, t, _ in fields):
                return ErrorT()
            return Obj(tuple(fields))
        if isinstance(node, ArrLit):
            item: ExprType = Bottom()
            for sub in node.items:
                t = self.infer(sub, env)
                if isinstance(t, ErrorT):
                    return ErrorT()
                joined = type_join(item, t)
                if joined is None:
                    return self.fail(
                        node, "array-mismatch",
                        f"array items have incompatible types {type_name(item)} and {type_name(t)}",
                    )
                item = joined
            return Arr(item)
        raise TypeError(f"not an expression: {node!r}")  # pragma: no cover

    def _infer_call(self, node: Call, env: dict[str, ExprType]) -> ExprType:
        fn = node.fn
        arity = {"len": 1, "abs": 1, "round": 1, "min": 2, "max": 2, "contains": 2, "coalesce": 2}
        if fn not in arity:
            return self.fail(node, "unknown-builtin", f"unknown built-in {fn!r}")  # pragma: no cover
        if len(node.args) != arity[fn]:
            return self.fail(node, "call-arity", f"{fn} takes {arity[fn]} argument(s)")
        if fn == "coalesce":
            first, default = node.args
            default_t = self.infer(default, env)
            first_t = self._infer_optional_source(first, env)
            if isinstance(first_t, ErrorT) or isinstance(default_t, ErrorT):
                return ErrorT()
            joined = type_join(first_t, default_t)
            if joined is None:
                return self.fail(
                    node, "call-arg-type",
                    f"coalesce default {type_name(default_t)} does not match field {type_name(first_t)}",
                )
            return joined
        args = [self.infer(a, env) for a in node.args]
        if any(isinstance(a, ErrorT) for a in args):
            return ErrorT()
        if fn == "len":
            if not isinstance(args[0], Arr) and args[0] != STR:
                return self.fail(node, "call-arg-type", f"len needs an array or string, got {type_name(args[0])}")
            return INT
        if fn == "abs":
            if args[0] not in _NUMERIC:
                return self.fail(node, "call-arg-type", f"abs needs a number, got {type_name(args[0])}")
            return args[0]
        if fn == "round":
            if args[0] not in _NUMERIC:
                return self.fail(node, "call-arg-type", f"round needs a number, got {type_name(args[0])}")
            return INT
        if fn in ("min", "max"):
            for a, t in zip(node.args, args):
                if t not in _NUMERIC:
                    return self.fail(a, "call-arg-type", f"{fn} needs numbers, got {type_name(t)}")
            return INT if args == [INT, INT] else NUM
        if fn == "contains":
            hay, needle = args
            if isinstance(hay, Arr):
                if type_join(hay.item, needle) is None:
                    return self.fail(
                        node, "call-arg-type",
                        f"cannot search {type_name(needle)} in {type_name(hay)}",
                    )
                return BOOL
            if hay == STR:
                if needle != STR:
                    return self.fail(node, "call-arg-type", "contains on a string needs a string needle")
                return BOOL
            return self.fail(node, "call-arg-type", f"contains needs an array or string, got {type_name(hay)}")
        raise AssertionError(fn)  # pragma: no cover

    def _infer_optional_source(self, node: Expr, env: dict[str, ExprType]) -> ExprType:
        """First argument of coalesce: optional field access is permitted here."""
        if isinstance(node, FieldAccess):
            base = self.infer(node.base, env)
            if isinstance(base, ErrorT):
                return self.note(node, base)
            if not isinstance(base, Obj):
                return self.note(node, self.fail(node, "not-an-object",
                                                 f"cannot access field of {type_name(base)}"))
            entry = base.field(node.name)
            if entry is None:
                return self.note(node, self.fail(node, "unknown-field",
                                                 f"no field {node.name!r} in {type_name(base)}"))
            return self.note(node, entry[0])
        return self.infer(node, env)


def _field_path(node: FieldAccess) -> str:
    parts = [node.name]
    base = node.base
    while isinstance(base, FieldAccess):
        parts.append(base.name)
        base = base.base
    if isinstance(base, Var):
        parts.append(base.name)
    return ".".join(reversed(parts))


def infer_type(
    program: Expr,
    input_schema: Optional[SchemaDoc],
    expected_output: Optional[SchemaDoc],
) -> InferenceResult:
    """Type-check a program against port schemas.

    Union input schemas are checked arm-wise (every arm must type-check);
    a None input means the node is unwired and msg is an empty object.
    A None expected output skips the result-type constraint.
    """
    if input_schema is None:
        input_schema = SchemaDoc.obj({})
    input_arms = list(input_schema.arms) if input_schema.kind == "union" else [input_schema]
    out_type = schema_to_type(expected_output) if expected_output is not None else None
    arms: list[TypedArm] = []
    for arm_schema in input_arms:
        inf = _Inferencer()
        input_type = schema_to_type(arm_schema)
        result = inf.infer(program, {"msg": input_type})
        if not isinstance(result, ErrorT) and out_type is not None and not type_subtype(result, out_type):
            inf.fail(
                program, "result-type",
                f"result type {type_name(result)} does not fit expected output {type_name(out_type)}",
            )
        if inf.diagnostics:
            return InferenceResult(None, inf.diagnostics)
        arms.append(TypedArm(arm_schema, input_type, inf.types, result))
    return InferenceResult(TypedProgram(program, arms, expected_output), [])
