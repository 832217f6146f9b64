"""Iteration-indexed parameter expressions.

The pheromone weight, heuristic weight, and evaporation rate can each be a
constant or a function of the iteration number ``n``, written in a tiny
grammar: numeric literals, the variable ``n``, the four operators ``+ - * /``,
and parentheses. Implicit multiplication between a literal and ``n`` is
accepted, so ``0.1n`` means ``0.1 * n``. Iterations are numbered from 1.

There is no unary minus operator; a ``-`` directly in front of a number is
part of the literal.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union


class ScheduleSyntaxError(ValueError):
    """Schedule text that does not parse; carries the character position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"syntax error at position {pos}: {message}")
        self.pos = pos


class ScheduleEvalError(ArithmeticError):
    """Division by zero or a non-finite intermediate during evaluation."""


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class IterVar:
    """The iteration variable ``n``."""


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ScheduleExpr"
    right: "ScheduleExpr"


ScheduleExpr = Union[Const, IterVar, BinOp]

_TOKEN_RE = re.compile(r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<name>[A-Za-z_]\w*)|(?P<op>[()+\-*/]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ScheduleSyntaxError(f"unexpected character {text[bad]!r}", bad)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expr(self) -> ScheduleExpr:
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> ScheduleExpr:
        node = self.factor()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> ScheduleExpr:
        kind, text, pos = self.take()
        sign = 1.0
        if (kind, text) == ("op", "-"):
            kind, text, pos = self.take()
            if kind != "num":
                raise ScheduleSyntaxError("'-' is only allowed as a literal sign", pos)
            sign = -1.0
        if kind == "num":
            lit = Const(sign * float(text))
            # implicit multiplication: "0.1n"
            if self.peek()[:2] == ("name", "n"):
                self.take()
                return BinOp("*", lit, IterVar())
            return lit
        if kind == "name":
            if text == "n":
                return IterVar()
            raise ScheduleSyntaxError(f"unknown identifier {text!r}", pos)
        if (kind, text) == ("op", "("):
            node = self.expr()
            kind, text, pos = self.take()
            if (kind, text) != ("op", ")"):
                raise ScheduleSyntaxError("expected ')'", pos)
            return node
        raise ScheduleSyntaxError(f"unexpected {text!r}" if text else "unexpected end of input", pos)


def parse_schedule(text: str) -> ScheduleExpr:
    """Parse schedule text into an expression tree.

    Standard precedence (``* /`` over ``+ -``), left associativity.
    """
    p = _Parser(text)
    node = p.expr()
    kind, text_, pos = p.peek()
    if kind != "end":
        raise ScheduleSyntaxError(f"unexpected {text_!r}", pos)
    return node


def pretty_schedule(expr: ScheduleExpr) -> str:
    """Render an expression back to text; reparsing yields the same tree."""
    return _pretty(expr, 0)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _pretty(expr: ScheduleExpr, parent_prec: int, right_side: bool = False) -> str:
    if isinstance(expr, Const):
        s = repr(expr.value)
        return f"({s})" if expr.value < 0 and parent_prec > 0 else s
    if isinstance(expr, IterVar):
        return "n"
    prec = _PREC[expr.op]
    left = _pretty(expr.left, prec)
    right = _pretty(expr.right, prec, right_side=True)
    s = f"{left} {expr.op} {right}"
    # Parenthesize when we'd otherwise rebind: lower precedence inside higher,
    # or an equal-precedence subtree on the right of a left-associative chain.
    if prec < parent_prec or (prec == parent_prec and right_side):
        return f"({s})"
    return s


def eval_schedule(expr: ScheduleExpr, n: int) -> float:
    """Evaluate at iteration ``n`` (n ≥ 1) in double precision."""
    if n < 1:
        raise ValueError(f"iteration number must be ≥ 1, got {n}")
    value = _eval(expr, float(n))
    if not math.isfinite(value):
        raise ScheduleEvalError(f"non-finite result at n={n}")
    return value


def _eval(expr: ScheduleExpr, n: float) -> float:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, IterVar):
        return n
    a = _eval(expr.left, n)
    b = _eval(expr.right, n)
    if expr.op == "+":
        return a + b
    if expr.op == "-":
        return a - b
    if expr.op == "*":
        return a * b
    if b == 0.0:
        raise ScheduleEvalError("division by zero")
    return a / b


@dataclass(frozen=True)
class ScheduleViolation:
    n: int
    value: float
    reason: str

    def __str__(self) -> str:
        return f"{self.reason} at n={self.n}"


ROLES = ("alpha", "beta", "rho")


def validate_schedule_range(expr: ScheduleExpr, n_max: int, role: str) -> list[ScheduleViolation]:
    """Evaluate at every n in 1..n_max and flag out-of-domain values.

    alpha and beta must stay ≥ 0; rho must stay inside [0,1]; everything must
    be finite. Violations are data, not exceptions.
    """
    if role not in ROLES:
        raise ValueError(f"unknown role {role!r}")
    if n_max < 1:
        raise ValueError("n_max must be ≥ 1")
    out: list[ScheduleViolation] = []
    for n in range(1, n_max + 1):
        try:
            v = eval_schedule(expr, n)
        except ScheduleEvalError as e:
            out.append(ScheduleViolation(n, math.nan, str(e)))
            continue
        if role == "rho":
            if not 0.0 <= v <= 1.0:
                out.append(ScheduleViolation(n, v, "rho out of [0,1]"))
        elif v < 0.0:
            out.append(ScheduleViolation(n, v, f"{role} < 0"))
    return out
