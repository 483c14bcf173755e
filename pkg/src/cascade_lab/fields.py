"""Scalar fields on the (t, x) plane and the finite-difference oracle.

This module is the independent verification side of the package: it knows
how to extract a 2-jet from any field by central differences, evaluate the
pointwise residual of the two equations of interest, and sweep a grid with
a convergence-order estimate.

Residual sign convention: left-hand side minus right-hand side of the
displayed equations,

    hs:  u_tx - u*u_xx - kappa*u_x^2
    ep:  u_tx - T*u_t - X*u_x - U*u   with
         T = 1/(kappa*(t+x)),
         X = 2*(1-kappa)/(kappa*(t+x)),
         U = -2*(1-kappa)/(kappa*(t+x))^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from .exprlang import differentiate, evaluate, parse, variables
from .exprlang import Expr as _Expr

# Below this, residuals at step h and h/2 are considered converged and the
# order estimate is reported as +inf.
ORDER_FLOOR = 1e-12


class SingularDomainError(ValueError):
    """A point, path, or rectangle touches the singular line t + x = 0."""


class FieldEvaluationError(RuntimeError):
    """Field evaluation failed somewhere on a finite-difference stencil."""


@dataclass(frozen=True)
class Point:
    t: float
    x: float


@dataclass(frozen=True)
class Jet1:
    """A point of 1-jet space: position, value, first derivatives."""

    t: float
    x: float
    u: float
    u_t: float
    u_x: float


@dataclass(frozen=True)
class Jet2:
    """2-jet extension of Jet1 with the three second derivatives."""

    t: float
    x: float
    u: float
    u_t: float
    u_x: float
    u_tt: float
    u_tx: float
    u_xx: float


Evaluator = Callable[[float, float], float]


class ScalarField:
    """A function (t, x) -> u with optional exact partial evaluators.

    When an exact partial is present it is used instead of the central
    difference by ``fd_jet``; where provided, exact partials must agree
    with central differences to O(h^2).
    """

    def __init__(
        self,
        value: Evaluator,
        *,
        du_t: Optional[Evaluator] = None,
        du_x: Optional[Evaluator] = None,
        du_tt: Optional[Evaluator] = None,
        du_tx: Optional[Evaluator] = None,
        du_xx: Optional[Evaluator] = None,
    ):
        self.value = value
        self.du_t = du_t
        self.du_x = du_x
        self.du_tt = du_tt
        self.du_tx = du_tx
        self.du_xx = du_xx

    def __call__(self, t: float, x: float) -> float:
        return self.value(t, x)

    @classmethod
    def wrap(cls, f) -> "ScalarField":
        if isinstance(f, ScalarField):
            return f
        return cls(f)

    def values_only(self) -> "ScalarField":
        """A copy stripped of exact partials (forces the pure FD path)."""
        return ScalarField(self.value)


def field_from_expr(src, *, t_var: str = "t", x_var: str = "x") -> ScalarField:
    """Build a field from expression text (or a parsed tree) in t and x.

    All five partials are attached as exact symbolic derivatives.
    """
    e = parse(src) if isinstance(src, str) else src
    extra = variables(e) - {t_var, x_var}
    if extra:
        raise ValueError(
            f"expression may only use {t_var!r} and {x_var!r}, found {sorted(extra)}"
        )
    e_t = differentiate(e, t_var)
    e_x = differentiate(e, x_var)
    e_tt = differentiate(e_t, t_var)
    e_tx = differentiate(e_t, x_var)
    e_xx = differentiate(e_x, x_var)

    def make(tree: _Expr) -> Evaluator:
        return lambda t, x: evaluate(tree, {t_var: t, x_var: x})

    return ScalarField(
        make(e),
        du_t=make(e_t),
        du_x=make(e_x),
        du_tt=make(e_tt),
        du_tx=make(e_tx),
        du_xx=make(e_xx),
    )


def fd_jet(f, p: Point, h: float) -> Jet2:
    """Second-order central-difference 2-jet of a field at a point.

    u_t  = (f(t+h,x) - f(t-h,x)) / (2h)              (and u_x alike)
    u_tt = (f(t+h,x) - 2f + f(t-h,x)) / h^2          (and u_xx alike)
    u_tx = four-corner stencil / (4h^2)

    Exact partial evaluators on the field take precedence entry by entry.
    """
    if h <= 0:
        raise ValueError("finite-difference step h must be positive")
    f = ScalarField.wrap(f)
    t, x = p.t, p.x
    samples: dict[tuple[int, int], float] = {}

    def ev(i: int, j: int) -> float:
        key = (i, j)
        if key not in samples:
            samples[key] = f(t + i * h, x + j * h)
        return samples[key]

    u = ev(0, 0)
    u_t = f.du_t(t, x) if f.du_t else (ev(1, 0) - ev(-1, 0)) / (2 * h)
    u_x = f.du_x(t, x) if f.du_x else (ev(0, 1) - ev(0, -1)) / (2 * h)
    u_tt = f.du_tt(t, x) if f.du_tt else (ev(1, 0) - 2 * u + ev(-1, 0)) / (h * h)
    u_xx = f.du_xx(t, x) if f.du_xx else (ev(0, 1) - 2 * u + ev(0, -1)) / (h * h)
    if f.du_tx:
        u_tx = f.du_tx(t, x)
    else:
        u_tx = (ev(1, 1) - ev(1, -1) - ev(-1, 1) + ev(-1, -1)) / (4 * h * h)
    return Jet2(t, x, u, u_t, u_x, u_tt, u_tx, u_xx)


def fd_jet1(f, p: Point, h: float) -> Jet1:
    """First-order jet of a field (exact partials preferred, else FD)."""
    if h <= 0:
        raise ValueError("finite-difference step h must be positive")
    f = ScalarField.wrap(f)
    t, x = p.t, p.x
    u = f(t, x)
    u_t = f.du_t(t, x) if f.du_t else (f(t + h, x) - f(t - h, x)) / (2 * h)
    u_x = f.du_x(t, x) if f.du_x else (f(t, x + h) - f(t, x - h)) / (2 * h)
    return Jet1(t, x, u, u_t, u_x)


def residual_hs(j: Jet2, kappa: float) -> float:
    """Pointwise residual u_tx - u*u_xx - kappa*u_x^2."""
    return j.u_tx - j.u * j.u_xx - kappa * j.u_x * j.u_x


def residual_ep(j: Jet2, kappa: float) -> float:
    """Pointwise residual u_tx - T*u_t - X*u_x - U*u of the linear equation."""
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    s = j.t + j.x
    if s == 0:
        raise SingularDomainError("residual undefined on the line t + x = 0")
    T = 1.0 / (kappa * s)
    X = 2.0 * (1.0 - kappa) / (kappa * s)
    U = -2.0 * (1.0 - kappa) / (kappa * s) ** 2
    return j.u_tx - T * j.u_t - X * j.u_x - U * j.u


@dataclass(frozen=True)
class GridSpec:
    """A rectangle with point counts; rows are swept t-major, then x."""

    t_min: float
    t_max: float
    x_min: float
    x_max: float
    n_t: int
    n_x: int

    def __post_init__(self):
        if self.n_t < 2 or self.n_x < 2:
            raise ValueError("grid counts must be at least 2")
        if not (self.t_min < self.t_max and self.x_min < self.x_max):
            raise ValueError("grid rectangle must have positive extent")

    def t_values(self) -> list[float]:
        span = self.t_max - self.t_min
        return [self.t_min + i * span / (self.n_t - 1) for i in range(self.n_t)]

    def x_values(self) -> list[float]:
        span = self.x_max - self.x_min
        return [self.x_min + j * span / (self.n_x - 1) for j in range(self.n_x)]

    def points(self) -> Iterator[Point]:
        xs = self.x_values()
        for t in self.t_values():
            for x in xs:
                yield Point(t, x)

    def as_list(self) -> list:
        return [self.t_min, self.t_max, self.n_t, self.x_min, self.x_max, self.n_x]


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of a grid sweep; passed iff max_abs_residual <= tol."""

    equation: str
    kappa: float
    grid: GridSpec
    h: float
    tol: float
    max_abs_residual: float
    order_estimate: float
    passed: bool
    worst_point: Optional[Point] = None

    def to_json_dict(self) -> dict:
        order = "inf" if math.isinf(self.order_estimate) else self.order_estimate
        return {
            "equation": self.equation,
            "kappa": self.kappa,
            "grid": self.grid.as_list(),
            "h": self.h,
            "max_abs_residual": self.max_abs_residual,
            "order_estimate": order,
            "pass": self.passed,
        }


def grid_verify_residual(
    f,
    residual_fn: Callable[[Jet2], float],
    equation: str,
    kappa: float,
    grid: GridSpec,
    h: float,
    tol: float,
) -> VerifyReport:
    """Sweep a grid with an arbitrary jet residual (core of grid_verify).

    The maximum is taken by value with ties resolved by lexicographic point
    order (t-major); the order estimate comes from re-running the worst
    point at h/2: log2(r_h / r_{h/2}), reported as +inf when both residuals
    sit below ORDER_FLOOR.
    """
    f = ScalarField.wrap(f)
    worst_val = -1.0
    worst_p: Optional[Point] = None
    for p in grid.points():
        try:
            jet = fd_jet(f, p, h)
            r = abs(residual_fn(jet))
        except Exception as exc:
            raise FieldEvaluationError(
                f"field evaluation failed at t={p.t!r}, x={p.x!r}"
            ) from exc
        if r > worst_val:
            worst_val, worst_p = r, p
    r_h = worst_val
    r_half = abs(residual_fn(fd_jet(f, worst_p, h / 2)))
    if (r_h < ORDER_FLOOR and r_half < ORDER_FLOOR) or r_half == 0.0 or r_h == 0.0:
        order = math.inf
    else:
        order = math.log2(r_h / r_half)
    return VerifyReport(
        equation=equation,
        kappa=kappa,
        grid=grid,
        h=h,
        tol=tol,
        max_abs_residual=r_h,
        order_estimate=order,
        passed=r_h <= tol,
        worst_point=worst_p,
    )


def grid_verify(
    f, residual: str, kappa: float, grid: GridSpec, h: float, tol: float
) -> VerifyReport:
    """Verify a field against one of the named residuals ("hs" or "ep").

    For "ep" the rectangle must keep the whole FD stencil strictly on the
    t + x > 0 side of the singular line; rectangles that touch or cross it
    are rejected rather than swept with holes.
    """
    if residual == "hs":
        fn = lambda j: residual_hs(j, kappa)
    elif residual == "ep":
        if kappa == 0:
            raise ValueError("kappa must be nonzero")
        corner = grid.t_min + grid.x_min
        if corner <= 0:
            raise SingularDomainError(
                "rectangle touches or crosses the singular line t + x = 0"
            )
        if corner - 2 * h <= 0:
            raise SingularDomainError(
                "FD stencil would cross the singular line t + x = 0; "
                "shrink h or move the rectangle"
            )
        fn = lambda j: residual_ep(j, kappa)
    else:
        raise ValueError(f"unknown residual {residual!r}; expected 'hs' or 'ep'")
    return grid_verify_residual(f, fn, residual, kappa, grid, h, tol)
