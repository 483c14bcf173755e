"""Expression trees for small scalar formulas.

The node types are shared by the parser, the evaluator, and the symbolic
derivative.  Trees are immutable values and compare structurally, so they
are safe to hand around and to use as test fixtures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union


class ExprError(Exception):
    """Base class for every error raised by this subpackage."""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    child: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str  # one of FUNCTION_NAMES
    arg: "Expr"


Expr = Union[Num, Var, Neg, Bin, Call]

FUNCTION_NAMES = ("sin", "cos", "exp", "ln", "sqrt")

# Printing / parsing precedence: ^ binds tightest (right associative), then
# unary minus, then * and /, then + and -.
_BIN_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3
_ATOM_PREC = 5


def _prec(e: Expr) -> int:
    if isinstance(e, Bin):
        return _BIN_PREC[e.op]
    if isinstance(e, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def format_number(v: float) -> str:
    if math.isfinite(v) and v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_source(e: Expr) -> str:
    """Render a tree in the input grammar with minimal parentheses.

    Trees produced by ``parse`` round-trip structurally.  Trees holding
    negative literals (possible after constant folding) render to the
    unary-minus spelling of the same value.
    """
    if isinstance(e, Num):
        return format_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.child)
        if _prec(e.child) < _NEG_PREC:
            inner = f"({inner})"
        return "-" + inner
    left = to_source(e.left)
    right = to_source(e.right)
    if e.op == "^":
        # Left operand must be an atom; the exponent may start with a unary
        # minus and chains right-associatively.
        if _prec(e.left) < _ATOM_PREC:
            left = f"({left})"
        if _prec(e.right) < _NEG_PREC:
            right = f"({right})"
        return f"{left}^{right}"
    p = _BIN_PREC[e.op]
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}"


def variables(e: Expr) -> frozenset[str]:
    """Names of all variables occurring in the tree."""
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Neg):
        return variables(e.child)
    if isinstance(e, Call):
        return variables(e.arg)
    if isinstance(e, Bin):
        return variables(e.left) | variables(e.right)
    return frozenset()
