"""Evaluation, symbolic differentiation, and light simplification.

Differentiation is purely structural (sum, product, quotient, chain and
power rules); the only cleanup applied afterwards is ``simplify``, which
does constant folding and identity elimination and never changes the value
of an expression where both forms are defined.
"""

from __future__ import annotations

import math
from typing import Mapping

from .nodes import Bin, Call, Expr, ExprError, Neg, Num, Var

Env = Mapping[str, float]


class EvalError(ExprError):
    pass


class UnboundVariableError(EvalError):
    pass


class DomainError(EvalError):
    pass


def _power(base: float, exponent: float) -> float:
    # Integer exponents keep the repeated-multiplication semantics, so a
    # negative base is fine there.  Fractional powers are real-valued only
    # for a positive base and evaluate as exp(y*ln(x)).
    if exponent == int(exponent):
        if base == 0.0 and exponent < 0:
            raise DomainError("0 raised to a negative power")
        return math.pow(base, exponent)
    if base <= 0.0:
        raise DomainError(
            f"{base!r}^{exponent!r}: fractional power of a non-positive base"
        )
    return math.exp(exponent * math.log(base))


def _call(fn: str, v: float) -> float:
    if fn == "sin":
        return math.sin(v)
    if fn == "cos":
        return math.cos(v)
    if fn == "exp":
        return math.exp(v)
    if fn == "ln":
        if v <= 0.0:
            raise DomainError(f"ln of non-positive value {v!r}")
        return math.log(v)
    if fn == "sqrt":
        if v < 0.0:
            raise DomainError(f"sqrt of negative value {v!r}")
        return math.sqrt(v)
    raise EvalError(f"unknown function {fn!r}")


def _apply(op: str, left: float, right: float) -> float:
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        if right == 0.0:
            raise DomainError("division by zero")
        return left / right
    if op == "^":
        return _power(left, right)
    raise EvalError(f"unknown operator {op!r}")


def evaluate(e: Expr, env: Env) -> float:
    """Evaluate the tree at the given variable binding.

    Unbound variables raise, they never default; ln/sqrt/fractional powers
    outside their real domain and division by zero raise DomainError.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return float(env[e.name])
        except KeyError:
            raise UnboundVariableError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Neg):
        return -evaluate(e.child, env)
    if isinstance(e, Bin):
        return _apply(e.op, evaluate(e.left, env), evaluate(e.right, env))
    if isinstance(e, Call):
        return _call(e.fn, evaluate(e.arg, env))
    raise TypeError(f"not an expression node: {e!r}")


_ONE = Num(1.0)
_ZERO = Num(0.0)


def _d(e: Expr, var: str) -> Expr:
    if isinstance(e, Num):
        return _ZERO
    if isinstance(e, Var):
        return _ONE if e.name == var else _ZERO
    if isinstance(e, Neg):
        return Neg(_d(e.child, var))
    if isinstance(e, Bin):
        l, r = e.left, e.right
        dl, dr = _d(l, var), _d(r, var)
        if e.op in ("+", "-"):
            return Bin(e.op, dl, dr)
        if e.op == "*":
            return Bin("+", Bin("*", dl, r), Bin("*", l, dr))
        if e.op == "/":
            num = Bin("-", Bin("*", dl, r), Bin("*", l, dr))
            return Bin("/", num, Bin("^", r, Num(2.0)))
        # power rule for a constant exponent, logarithmic rule otherwise
        if isinstance(r, Num):
            factor = Bin("*", Num(r.value), Bin("^", l, Num(r.value - 1.0)))
            return Bin("*", factor, dl)
        log_part = Bin("*", dr, Call("ln", l))
        ratio_part = Bin("/", Bin("*", r, dl), l)
        return Bin("*", e, Bin("+", log_part, ratio_part))
    if isinstance(e, Call):
        a = e.arg
        da = _d(a, var)
        if e.fn == "sin":
            outer: Expr = Call("cos", a)
        elif e.fn == "cos":
            outer = Neg(Call("sin", a))
        elif e.fn == "exp":
            outer = Call("exp", a)
        elif e.fn == "ln":
            outer = Bin("/", _ONE, a)
        else:  # sqrt
            outer = Bin("/", _ONE, Bin("*", Num(2.0), Call("sqrt", a)))
        return Bin("*", outer, da)
    raise TypeError(f"not an expression node: {e!r}")


def differentiate(e: Expr, var: str) -> Expr:
    """Exact partial derivative of the tree with respect to ``var``.

    The result is simplified, so the derivative of a var-free expression
    is the literal 0.
    """
    return simplify(_d(e, var))


def _is_num(e: Expr, value: float) -> bool:
    return isinstance(e, Num) and e.value == value


def simplify(e: Expr) -> Expr:
    """Constant folding plus 0/1 identity elimination.

    The result evaluates bit-identically to the input at every environment
    where both are defined.
    """
    if isinstance(e, (Num, Var)):
        return e
    if isinstance(e, Neg):
        c = simplify(e.child)
        if isinstance(c, Num):
            return Num(-c.value)
        if isinstance(c, Neg):
            return c.child
        return Neg(c)
    if isinstance(e, Call):
        a = simplify(e.arg)
        if isinstance(a, Num):
            try:
                return Num(_call(e.fn, a.value))
            except (DomainError, OverflowError):
                pass
        return Call(e.fn, a)
    l = simplify(e.left)
    r = simplify(e.right)
    if isinstance(l, Num) and isinstance(r, Num):
        try:
            return Num(_apply(e.op, l.value, r.value))
        except (DomainError, OverflowError):
            pass
    op = e.op
    if op == "+":
        if _is_num(l, 0.0):
            return r
        if _is_num(r, 0.0):
            return l
    elif op == "-":
        if _is_num(r, 0.0):
            return l
        if _is_num(l, 0.0):
            return simplify(Neg(r))
    elif op == "*":
        if _is_num(l, 0.0) or _is_num(r, 0.0):
            return _ZERO
        if _is_num(l, 1.0):
            return r
        if _is_num(r, 1.0):
            return l
    elif op == "/":
        if _is_num(l, 0.0):
            return _ZERO
        if _is_num(r, 1.0):
            return l
    elif op == "^":
        if _is_num(r, 1.0):
            return l
        if _is_num(r, 0.0):
            return _ONE
    return Bin(op, l, r)
