"""Tokenizer, recursive-descent parser, and pretty printer.

pretty(parse(src)) reparses to an AST equal to parse(src); positions are
1-based line/column.
"""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import (
    BUILTINS,
    KEYWORDS,
    PRECEDENCE,
    UNARY_PRECEDENCE,
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


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.reason = message


@dataclass(frozen=True)
class Token:
    kind: str  # int num str ident punct eof
    text: str
    value: object
    line: int
    col: int


_PUNCT = ("||", "&&", "==", "!=", "<=", ">=", "<", ">", "+", "-", "*", "/", "%",
          "!", "(", ")", "[", "]", "{", "}", ",", ":", "=", ".")

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}
_UNESCAPES = {"\n": "\\n", "\t": "\\t", '"': '\\"', "\\": "\\\\"}


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        start_line, start_col = line, col
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            is_num = False
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                is_num = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    is_num = True
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            value = float(text) if is_num else int(text)
            tokens.append(Token("num" if is_num else "int", text, value, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            tokens.append(Token("ident", text, text, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            out = []
            while True:
                if j >= n or source[j] == "\n":
                    raise ParseError("unterminated string literal", start_line, start_col)
                c = source[j]
                if c == '"':
                    j += 1
                    break
                if c == "\\":
                    if j + 1 >= n or source[j + 1] not in _ESCAPES:
                        raise ParseError("bad escape sequence", line, col + (j - i))
                    out.append(_ESCAPES[source[j + 1]])
                    j += 2
                    continue
                out.append(c)
                j += 1
            tokens.append(Token("str", source[i:j], "".join(out), start_line, start_col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if source.startswith(p, i):
                tokens.append(Token("punct", p, p, start_line, start_col))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", None, line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return self.advance()

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col)

    # expression grammar, loosest first

    def expression(self) -> Expr:
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "let":
            self.advance()
            name_tok = self.peek()
            if name_tok.kind != "ident" or name_tok.text in KEYWORDS:
                raise self.error("expected a binding name after 'let'")
            if name_tok.text in BUILTINS:
                raise self.error(f"{name_tok.text!r} is a built-in and cannot be bound")
            self.advance()
            self.expect("=")
            value = self.expression()
            in_tok = self.peek()
            if not (in_tok.kind == "ident" and in_tok.text == "in"):
                raise self.error("expected 'in' after the let binding")
            self.advance()
            body = self.expression()
            return Let(name_tok.text, value, body, line=tok.line, col=tok.col)
        if tok.kind == "ident" and tok.text == "if":
            self.advance()
            cond = self.expression()
            kw = self.peek()
            if not (kw.kind == "ident" and kw.text == "then"):
                raise self.error("expected 'then'")
            self.advance()
            then = self.expression()
            kw = self.peek()
            if not (kw.kind == "ident" and kw.text == "else"):
                raise self.error("expected 'else'")
            self.advance()
            orelse = self.expression()
            return If(cond, then, orelse, line=tok.line, col=tok.col)
        return self.binary(1)

    def binary(self, min_prec: int) -> Expr:
        left = self.unary()
        while True:
            tok = self.peek()
            prec = PRECEDENCE.get(tok.text) if tok.kind == "punct" else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self.binary(prec + 1)
            left = Binary(tok.text, left, right, line=tok.line, col=tok.col)

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "punct" and tok.text in ("-", "!"):
            self.advance()
            operand = self.unary()
            return Unary(tok.text, operand, line=tok.line, col=tok.col)
        return self.postfix()

    def postfix(self) -> Expr:
        expr = self.primary()
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.text == ".":
                self.advance()
                name_tok = self.peek()
                if name_tok.kind != "ident":
                    raise self.error("expected a field name after '.'")
                self.advance()
                expr = FieldAccess(expr, name_tok.text, line=tok.line, col=tok.col)
            else:
                return expr

    def primary(self) -> Expr:
        tok = self.peek()
        if tok.kind in ("int", "num", "str"):
            self.advance()
            return Lit(tok.value, line=tok.line, col=tok.col)
        if tok.kind == "ident":
            if tok.text == "true":
                self.advance()
                return Lit(True, line=tok.line, col=tok.col)
            if tok.text == "false":
                self.advance()
                return Lit(False, line=tok.line, col=tok.col)
            if tok.text in KEYWORDS:
                raise self.error(f"unexpected keyword {tok.text!r}")
            if tok.text in BUILTINS:
                self.advance()
                self.expect("(")
                args = self.arguments(")")
                return Call(tok.text, tuple(args), line=tok.line, col=tok.col)
            self.advance()
            return Var(tok.text, line=tok.line, col=tok.col)
        if tok.text == "(":
            self.advance()
            inner = self.expression()
            self.expect(")")
            return inner
        if tok.text == "[":
            self.advance()
            items = self.arguments("]")
            return ArrLit(tuple(items), line=tok.line, col=tok.col)
        if tok.text == "{":
            self.advance()
            fields: list[tuple[str, Expr]] = []
            seen: set[str] = set()
            if self.peek().text != "}":
                while True:
                    name_tok = self.peek()
                    if name_tok.kind not in ("ident", "str"):
                        raise self.error("expected a field name")
                    name = name_tok.value if name_tok.kind == "str" else name_tok.text
                    if name in seen:
                        raise self.error(f"duplicate field {name!r}")
                    seen.add(name)
                    self.advance()
                    self.expect(":")
                    fields.append((name, self.expression()))
                    if self.peek().text == ",":
                        self.advance()
                        continue
                    break
            self.expect("}")
            return ObjLit(tuple(fields), line=tok.line, col=tok.col)
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")

    def arguments(self, closing: str) -> list[Expr]:
        args: list[Expr] = []
        if self.peek().text != closing:
            while True:
                args.append(self.expression())
                if self.peek().text == ",":
                    self.advance()
                    continue
                break
        self.expect(closing)
        return args


def parse(source: str) -> Expr:
    parser = _Parser(tokenize(source))
    expr = parser.expression()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing {tok.text!r}", tok.line, tok.col)
    return expr


# -- pretty printer --------------------------------------------------------------

def _field_key(name: str) -> str:
    if name and (name[0].isalpha() or name[0] == "_") and all(c.isalnum() or c == "_" for c in name):
        return name
    return '"' + "".join(_UNESCAPES.get(c, c) for c in name) + '"'


def pretty(expr: Expr, parent_prec: int = 0) -> str:
    if isinstance(expr, Lit):
        v = expr.value
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (int, float)):
            return repr(v) if isinstance(v, float) else str(v)
        return '"' + "".join(_UNESCAPES.get(c, c) for c in v) + '"'
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, FieldAccess):
        return f"{pretty(expr.base, UNARY_PRECEDENCE + 1)}.{expr.name}"
    if isinstance(expr, Let):
        text = f"let {expr.name} = {pretty(expr.value)} in\n{pretty(expr.body)}"
        return f"({text})" if parent_prec > 0 else text
    if isinstance(expr, If):
        text = f"if {pretty(expr.cond)} then {pretty(expr.then)} else {pretty(expr.orelse)}"
        return f"({text})" if parent_prec > 0 else text
    if isinstance(expr, Unary):
        text = f"{expr.op}{pretty(expr.operand, UNARY_PRECEDENCE)}"
        return f"({text})" if parent_prec > UNARY_PRECEDENCE else text
    if isinstance(expr, Binary):
        prec = PRECEDENCE[expr.op]
        left = pretty(expr.left, prec)
        right = pretty(expr.right, prec + 1)
        text = f"{left} {expr.op} {right}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(expr, Call):
        return f"{expr.fn}({', '.join(pretty(a) for a in expr.args)})"
    if isinstance(expr, ObjLit):
        inner = ", ".join(f"{_field_key(name)}: {pretty(val)}" for name, val in expr.fields)
        return "{" + inner + "}"
    if isinstance(expr, ArrLit):
        return "[" + ", ".join(pretty(a) for a in expr.items) + "]"
    raise TypeError(f"not an expression: {expr!r}")
