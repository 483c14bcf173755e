"""Parsing, evaluation, and symbolic differentiation of scalar expressions."""

from .calculus import (
    DomainError,
    Env,
    EvalError,
    UnboundVariableError,
    differentiate,
    evaluate,
    simplify,
)
from .nodes import (
    Bin,
    Call,
    Expr,
    ExprError,
    FUNCTION_NAMES,
    Neg,
    Num,
    Var,
    to_source,
    variables,
)
from .parser import ParseError, UnknownFunctionError, parse

__all__ = [
    "Bin",
    "Call",
    "DomainError",
    "Env",
    "EvalError",
    "Expr",
    "ExprError",
    "FUNCTION_NAMES",
    "Neg",
    "Num",
    "ParseError",
    "UnboundVariableError",
    "UnknownFunctionError",
    "Var",
    "differentiate",
    "evaluate",
    "parse",
    "simplify",
    "to_source",
    "variables",
]
