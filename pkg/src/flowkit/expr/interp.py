"""Deterministic evaluator for typed expression programs.

Operator semantics follow the static types: int/int arithmetic stays exact
(64-bit, overflow reported), anything involving num runs in floats. Division
by zero, overflow, and results that fail the expected output schema are
reported as EvalError, never silently mangled.
"""

from __future__ import annotations

import math
from typing import Any, Optional

from ..schema import SchemaDoc, validate_value
from .nodes import ArrLit, Binary, Call, Expr, FieldAccess, If, Let, Lit, ObjLit, Unary, Var
from .types import INT, NUM, TypedArm, TypedProgram

_I64_MIN = -(2**63)
_I64_MAX = 2**63 - 1


class EvalError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _check_int(value: int) -> int:
    if value < _I64_MIN or value > _I64_MAX:
        raise EvalError("overflow", "integer arithmetic overflow")
    return value


def _check_num(value: float) -> float:
    if not math.isfinite(value):
        raise EvalError("overflow", "numeric result is not finite")
    return value


def _trunc_div(a: int, b: int) -> int:
    if b == 0:
        raise EvalError("div-zero", "division by zero")
    q = a // b
    if q < 0 and q * b != a:
        q += 1
    return q


def evaluate(typed: TypedProgram, value: Any) -> Any:
    """Evaluate against a schema-conforming input; deterministic by construction."""
    arm = _pick_arm(typed, value)
    result = _eval(typed.ast, {"msg": value}, arm)
    if typed.output_schema is not None:
        check = validate_value(result, typed.output_schema)
        if not check.ok:
            raise EvalError(
                "output-invalid",
                f"result does not conform to the output schema at {', '.join(check.violations) or 'root'}",
            )
    return result


def _pick_arm(typed: TypedProgram, value: Any) -> TypedArm:
    for arm in typed.arms:
        if validate_value(value, arm.input_schema).ok:
            return arm
    raise EvalError("no-arm", "input does not conform to any input schema arm")


def _eval(node: Expr, env: dict[str, Any], arm: TypedArm) -> Any:
    if isinstance(node, Lit):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, FieldAccess):
        return _eval(node.base, env, arm)[node.name]
    if isinstance(node, Let):
        inner = dict(env)
        inner[node.name] = _eval(node.value, env, arm)
        return _eval(node.body, inner, arm)
    if isinstance(node, If):
        if _eval(node.cond, env, arm):
            return _eval(node.then, env, arm)
        return _eval(node.orelse, env, arm)
    if isinstance(node, Unary):
        v = _eval(node.operand, env, arm)
        if node.op == "!":
            return not v
        if arm.node_types.get(id(node)) == INT:
            return _check_int(-v)
        return _check_num(-float(v))
    if isinstance(node, Binary):
        op = node.op
        if op == "&&":
            return bool(_eval(node.left, env, arm)) and bool(_eval(node.right, env, arm))
        if op == "||":
            return bool(_eval(node.left, env, arm)) or bool(_eval(node.right, env, arm))
        left = _eval(node.left, env, arm)
        right = _eval(node.right, env, arm)
        if op in ("+", "-", "*", "/", "%"):
            if arm.node_types.get(id(node)) == INT:
                if op == "+":
                    return _check_int(left + right)
                if op == "-":
                    return _check_int(left - right)
                if op == "*":
                    return _check_int(left * right)
                if op == "/":
                    return _check_int(_trunc_div(left, right))
                if right == 0:
                    raise EvalError("div-zero", "modulo by zero")
                return _check_int(left - _trunc_div(left, right) * right)
            lf, rf = float(left), float(right)
            if op == "+":
                return _check_num(lf + rf)
            if op == "-":
                return _check_num(lf - rf)
            if op == "*":
                return _check_num(lf * rf)
            if rf == 0.0:
                raise EvalError("div-zero", "division by zero")
            if op == "/":
                return _check_num(lf / rf)
            return _check_num(math.fmod(lf, rf))
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
        raise AssertionError(op)  # pragma: no cover
    if isinstance(node, Call):
        return _eval_call(node, env, arm)
    if isinstance(node, ObjLit):
        return {name: _eval(value, env, arm) for name, value in node.fields}
    if isinstance(node, ArrLit):
        return [_eval(item, env, arm) for item in node.items]
    raise TypeError(f"not an expression: {node!r}")  # pragma: no cover


def _eval_call(node: Call, env: dict[str, Any], arm: TypedArm) -> Any:
    fn = node.fn
    if fn == "coalesce":
        first, default = node.args
        if isinstance(first, FieldAccess):
            base = _eval(first.base, env, arm)
            if first.name in base:
                return base[first.name]
            return _eval(default, env, arm)
        return _eval(first, env, arm)
    args = [_eval(a, env, arm) for a in node.args]
    if fn == "len":
        return len(args[0])
    if fn == "abs":
        if arm.node_types.get(id(node)) == INT:
            return _check_int(abs(args[0]))
        return _check_num(abs(float(args[0])))
    if fn == "round":
        return _check_int(round(args[0]))
    if fn in ("min", "max"):
        picked = min(args) if fn == "min" else max(args)
        if arm.node_types.get(id(node)) == NUM:
            return float(picked)
        return picked
    if fn == "contains":
        hay, needle = args
        return needle in hay
    raise AssertionError(fn)  # pragma: no cover
