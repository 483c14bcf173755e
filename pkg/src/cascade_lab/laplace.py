"""Linear-hyperbolic machinery for the Euler-Poisson coefficient family.

Everything here revolves around equations of the shape

    u_tx = T(t,x) u_t + X(t,x) u_x + U(t,x) u.

The semi-invariants

    H = -T_t + T*X + U        K = -X_x + T*X + U

detect factorizability of the operator, and the invariants

    P = K / H                 Q = (ln|H|)_tx / H

classify the equation up to variable and gauge changes.  For the
Euler-Poisson family (coefficients below) P + Q = 2 identically, and one
first-order substitution chain (v, then w) reduces the equation to an ODE,
which is what the closed-form solution builders integrate back up.

All family operations require t + x > 0 and kappa != 0 and reject
violations eagerly.
"""

from __future__ import annotations

import math
from bisect import bisect_left, insort
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

from .exprlang import (
    Expr,
    Num,
    differentiate,
    evaluate,
    parse,
    simplify,
    to_source,
    variables,
)
from .fields import Jet1, Jet2, Point, ScalarField, SingularDomainError
from .quadrature import adaptive_simpson

Coeff = Callable[[float, float], float]

NATURAL = "natural"
BASE_POINT = "base-point"


class InvariantUndefinedError(ValueError):
    """P and Q are undefined where the semi-invariant H vanishes."""


def _require_kappa(kappa: float) -> None:
    if kappa == 0:
        raise ValueError("kappa must be nonzero")


def _offset(t: float, x: float) -> float:
    s = t + x
    if s <= 0:
        raise SingularDomainError(
            f"t + x must be positive on the Euler-Poisson family "
            f"(got t={t!r}, x={x!r})"
        )
    return s


@dataclass(frozen=True)
class HyperbolicCoeffs:
    """Coefficient triple (T, X, U) of a linear hyperbolic equation.

    T_t and X_x are exact first-partial evaluators; log_h_tx is the exact
    mixed partial of ln|H|.  Any of the three may be omitted, in which
    case the invariant computations fall back to central differences.
    """

    T: Coeff
    X: Coeff
    U: Coeff
    T_t: Optional[Coeff] = None
    X_x: Optional[Coeff] = None
    log_h_tx: Optional[Coeff] = None


def ep_coeffs(kappa: float) -> HyperbolicCoeffs:
    """Euler-Poisson coefficients with exact closed-form partials.

    T = 1/(kappa*s), X = 2*(1-kappa)/(kappa*s), U = -2*(1-kappa)/(kappa*s)^2
    with s = t + x > 0.  H = 1/(kappa*s^2), so (ln|H|)_tx = 2/s^2.
    """
    _require_kappa(kappa)
    k = kappa

    def T(t, x):
        return 1.0 / (k * _offset(t, x))

    def X(t, x):
        return 2.0 * (1.0 - k) / (k * _offset(t, x))

    def U(t, x):
        return -2.0 * (1.0 - k) / (k * _offset(t, x)) ** 2

    def T_t(t, x):
        return -1.0 / (k * _offset(t, x) ** 2)

    def X_x(t, x):
        return -2.0 * (1.0 - k) / (k * _offset(t, x) ** 2)

    def log_h_tx(t, x):
        return 2.0 / _offset(t, x) ** 2

    return HyperbolicCoeffs(T, X, U, T_t=T_t, X_x=X_x, log_h_tx=log_h_tx)


def ep_trans_coeffs(kappa: float) -> HyperbolicCoeffs:
    """Coefficients of the equation satisfied by v = u_x - u/(kappa*(t+x)).

    T' = (1-2k)/(k*s), X' = 2*(1-k)/(k*s), U' = -(2k-1)*(k-2)/(k*s)^2.

    The v_x coefficient is taken as 2*(1-kappa)/(kappa*(t+x)): with this
    sign H' vanishes identically (the operator factorizes) and
    K' = 1/(kappa*s^2) equals H of ep_coeffs, which is exactly the
    semi-invariant exchange the substitution performs; the opposite sign
    fails the substitution oracle.  No exact (ln|H'|)_tx is attached since
    H' = 0 makes the invariants undefined.
    """
    _require_kappa(kappa)
    k = kappa

    def T(t, x):
        return (1.0 - 2.0 * k) / (k * _offset(t, x))

    def X(t, x):
        return 2.0 * (1.0 - k) / (k * _offset(t, x))

    def U(t, x):
        return -(2.0 * k - 1.0) * (k - 2.0) / (k * _offset(t, x)) ** 2

    def T_t(t, x):
        return -(1.0 - 2.0 * k) / (k * _offset(t, x) ** 2)

    def X_x(t, x):
        return -2.0 * (1.0 - k) / (k * _offset(t, x) ** 2)

    return HyperbolicCoeffs(T, X, U, T_t=T_t, X_x=X_x)


def without_exact_partials(c: HyperbolicCoeffs) -> HyperbolicCoeffs:
    """Drop the exact partials so invariants run on the FD fallback."""
    return HyperbolicCoeffs(c.T, c.X, c.U)


@dataclass(frozen=True)
class SemiInvariants:
    h: float
    k: float


@dataclass(frozen=True)
class OvsiannikovInvariants:
    p: float
    q: float


def _fd_step(base: float, t: float, x: float) -> float:
    # Scale the step with the distance to the singular line so the stencil
    # never crosses it and truncation/roundoff stay balanced across the
    # whole t+x range.
    s = abs(t + x)
    return base * s if s > 0 else base


def semi_invariants(
    c: HyperbolicCoeffs, p: Point, *, fd_step: float = 1e-5
) -> SemiInvariants:
    """Pointwise H = -T_t + T*X + U and K = -X_x + T*X + U."""
    t, x = p.t, p.x
    if c.T_t is not None:
        tt = c.T_t(t, x)
    else:
        d = _fd_step(fd_step, t, x)
        tt = (c.T(t + d, x) - c.T(t - d, x)) / (2 * d)
    if c.X_x is not None:
        xx = c.X_x(t, x)
    else:
        d = _fd_step(fd_step, t, x)
        xx = (c.X(t, x + d) - c.X(t, x - d)) / (2 * d)
    cross = c.T(t, x) * c.X(t, x)
    u = c.U(t, x)
    return SemiInvariants(h=-tt + cross + u, k=-xx + cross + u)


def ovsiannikov_invariants(
    c: HyperbolicCoeffs, p: Point, *, fd_step: float = 1e-3
) -> OvsiannikovInvariants:
    """P = K/H and Q = (ln|H|)_tx / H at a point.

    Raises InvariantUndefinedError where H vanishes (relative to the size
    of its constituent terms) instead of dividing through.

    Without an exact (ln|H|)_tx the mixed partial is nested central
    differences.  H is then itself a difference quotient, whose roundoff
    the outer stencil amplifies by 1/(4*step^2); a wide inner step (the
    inner truncation is constant-relative and cancels across the corners)
    and Richardson extrapolation of the outer stencil keep the fallback
    within ~1e-7 of the exact path on this family.
    """
    t, x = p.t, p.x
    si = semi_invariants(c, p)
    scale = max(1.0, abs(c.T(t, x) * c.X(t, x)), abs(c.U(t, x)))
    if abs(si.h) <= 1e-12 * scale:
        raise InvariantUndefinedError(
            f"semi-invariant H vanishes at t={t!r}, x={x!r}; P and Q undefined"
        )
    if c.log_h_tx is not None:
        mixed = c.log_h_tx(t, x)
    else:

        def log_h(tt, xx):
            return math.log(abs(semi_invariants(c, Point(tt, xx), fd_step=1e-3).h))

        def four_corner(d):
            return (
                log_h(t + d, x + d)
                - log_h(t + d, x - d)
                - log_h(t - d, x + d)
                + log_h(t - d, x - d)
            ) / (4 * d * d)

        d = _fd_step(fd_step, t, x)
        mixed = (4.0 * four_corner(d) - four_corner(2.0 * d)) / 3.0
    return OvsiannikovInvariants(p=si.k / si.h, q=mixed / si.h)


def linear_residual(j: Jet2, c: HyperbolicCoeffs) -> float:
    """u_tx - T*u_t - X*u_x - U*u for an arbitrary coefficient triple."""
    t, x = j.t, j.x
    return j.u_tx - c.T(t, x) * j.u_t - c.X(t, x) * j.u_x - c.U(t, x) * j.u


# ---------------------------------------------------------------------------
# The first-order substitution chain.


def u_to_v(j: Jet1, kappa: float) -> float:
    """v = u_x - u/(kappa*(t+x))."""
    _require_kappa(kappa)
    s = _offset(j.t, j.x)
    return j.u_x - j.u / (kappa * s)


def v_to_u(v: ScalarField, kappa: float, p: Point, *, h: float = 1e-6) -> float:
    """u = kappa*(t+x)^2 * (v_t - 2*(1-kappa)/(kappa*(t+x)) * v).

    Inverts u_to_v on solution fields; v_t comes from the field's exact
    partial when present, else a central difference with step h.
    """
    _require_kappa(kappa)
    s = _offset(p.t, p.x)
    if v.du_t is not None:
        v_t = v.du_t(p.t, p.x)
    else:
        v_t = (v(p.t + h, p.x) - v(p.t - h, p.x)) / (2 * h)
    return kappa * s * s * (v_t - 2.0 * (1.0 - kappa) / (kappa * s) * v(p.t, p.x))


def v_to_w(j: Jet1, kappa: float) -> float:
    """w = v_x + (2*kappa-1)/(kappa*(t+x)) * v  (jet fields hold v)."""
    _require_kappa(kappa)
    s = _offset(j.t, j.x)
    return j.u_x + (2.0 * kappa - 1.0) / (kappa * s) * j.u


def w_ode_residual(w: ScalarField, kappa: float, p: Point, *, h: float = 1e-6) -> float:
    """Residual of the intermediate ODE: w_t + 2*(kappa-1)/(kappa*(t+x)) * w."""
    _require_kappa(kappa)
    s = _offset(p.t, p.x)
    if w.du_t is not None:
        w_t = w.du_t(p.t, p.x)
    else:
        w_t = (w(p.t + h, p.x) - w(p.t - h, p.x)) / (2 * h)
    return w_t + 2.0 * (kappa - 1.0) / (kappa * s) * w(p.t, p.x)


# ---------------------------------------------------------------------------
# Closed-form solution families.


@dataclass(frozen=True)
class SolutionSpec:
    """Recipe for one member of the exact solution family.

    S is an expression in t, R an expression in x.  The antiderivative
    convention matters: in base-point mode both integrals run from the
    shared x0 (which makes d/dt A1 = A2/kappa exact); natural mode uses
    the closed-form power antiderivative in (t+x) and therefore requires
    a constant R.
    """

    kappa: float
    s_expr: Expr
    r_expr: Expr
    mode: str = BASE_POINT
    x0: float = 0.0
    quad_tol: float = 1e-10

    def __post_init__(self):
        _require_kappa(self.kappa)
        if self.mode not in (NATURAL, BASE_POINT):
            raise ValueError(f"unknown antiderivative mode {self.mode!r}")
        if self.quad_tol <= 0:
            raise ValueError("quadrature tolerance must be positive")
        bad_s = variables(self.s_expr) - {"t"}
        if bad_s:
            raise ValueError(f"S may only depend on t, found {sorted(bad_s)}")
        bad_r = variables(self.r_expr) - {"x"}
        if bad_r:
            raise ValueError(f"R may only depend on x, found {sorted(bad_r)}")
        if self.mode == NATURAL and self.r_constant is None:
            raise ValueError(
                f"natural antiderivative mode needs a constant R, "
                f"got {to_source(self.r_expr)!r}"
            )

    @classmethod
    def from_strings(
        cls,
        kappa: float,
        s: str = "0",
        r: str = "1",
        mode: str = BASE_POINT,
        x0: float = 0.0,
        quad_tol: float = 1e-10,
    ) -> "SolutionSpec":
        return cls(kappa, parse(s), parse(r), mode=mode, x0=x0, quad_tol=quad_tol)

    @cached_property
    def r_constant(self) -> Optional[float]:
        folded = simplify(self.r_expr)
        return folded.value if isinstance(folded, Num) else None

    # The three exponents of the antiderivative integrands R(xi)*(t+xi)^alpha.
    @property
    def alpha1(self) -> float:  # the A1 integrand
        return 1.0 / self.kappa

    @property
    def alpha2(self) -> float:  # the A2 integrand
        return (1.0 - self.kappa) / self.kappa

    @property
    def alpha0(self) -> float:  # d/dt A2 = alpha2 * I(alpha0)
        return (1.0 - 2.0 * self.kappa) / self.kappa

    def eval_s(self, t: float) -> float:
        return evaluate(self.s_expr, {"t": t})

    def eval_r(self, x: float) -> float:
        return evaluate(self.r_expr, {"x": x})


class AntiderivativeTable:
    """Cumulative integrals I(alpha; t, x) = int_{x0}^{x} R(xi) (t+xi)^alpha dxi.

    Base-point mode keeps per-(t, alpha) checkpoint rows and integrates
    incrementally from the nearest cached x, which makes repeated nearby
    evaluations along a row both cheap and smooth to machine precision.
    Natural mode is the closed-form power antiderivative (constant R).

    Rows mutate as values are filled in; share one table per sweep, not
    across threads.
    """

    def __init__(self, spec: SolutionSpec):
        self.spec = spec
        self._rows: dict[tuple[float, float], tuple[list, dict]] = {}

    def integral(self, alpha: float, t: float, x: float) -> float:
        spec = self.spec
        s = _offset(t, x)
        if spec.mode == NATURAL:
            c0 = spec.r_constant
            if alpha == -1.0:
                return c0 * math.log(s)
            return c0 * math.pow(s, alpha + 1.0) / (alpha + 1.0)
        if t + spec.x0 <= 0:
            raise SingularDomainError(
                f"integration path from x0={spec.x0!r} crosses t + x = 0 at t={t!r}"
            )

        def integrand(xi: float) -> float:
            sx = t + xi
            if sx <= 0:
                raise SingularDomainError(
                    f"integration path crosses t + x = 0 (t={t!r}, xi={xi!r})"
                )
            return spec.eval_r(xi) * math.pow(sx, alpha)

        key = (t, alpha)
        row = self._rows.get(key)
        if row is None:
            row = ([], {})
            self._rows[key] = row
        xs, vals = row
        if x in vals:
            return vals[x]
        if not xs:
            base_x, base_val = spec.x0, 0.0
        else:
            i = bisect_left(xs, x)
            if i == 0:
                base_x = xs[0]
            elif i == len(xs):
                base_x = xs[-1]
            else:
                base_x = xs[i] if xs[i] - x < x - xs[i - 1] else xs[i - 1]
            base_val = vals[base_x]
        val = base_val + adaptive_simpson(integrand, base_x, x, spec.quad_tol)
        insort(xs, x)
        vals[x] = val
        return val


def antiderivative_pair(
    spec: SolutionSpec, p: Point, *, table: Optional[AntiderivativeTable] = None
) -> tuple[float, float]:
    """(A1, A2) = (I(1/kappa), I((1-kappa)/kappa)) at a point."""
    if table is None:
        table = AntiderivativeTable(spec)
    a1 = table.integral(spec.alpha1, p.t, p.x)
    a2 = table.integral(spec.alpha2, p.t, p.x)
    return a1, a2


def general_solution_v(spec: SolutionSpec) -> ScalarField:
    """The closed-form solution family of the transformed equation:

        v = (t+x)^a (S(t) + A1),   a = (1-2*kappa)/kappa.

    Exact v_t, v_x, v_tx are attached, built from S', the integrand, and
    the consistency identity d/dt A1 = A2/kappa.
    """
    k = spec.kappa
    a = (1.0 - 2.0 * k) / k
    b = spec.alpha1
    c = spec.alpha2
    ds = differentiate(spec.s_expr, "t")
    table = AntiderivativeTable(spec)

    def s_val(t):
        return spec.eval_s(t)

    def ds_val(t):
        return evaluate(ds, {"t": t})

    def value(t, x):
        s = _offset(t, x)
        g = s_val(t) + table.integral(b, t, x)
        return math.pow(s, a) * g

    def du_t(t, x):
        s = _offset(t, x)
        g = s_val(t) + table.integral(b, t, x)
        a2 = table.integral(c, t, x)
        return a * math.pow(s, a - 1.0) * g + math.pow(s, a) * (ds_val(t) + a2 / k)

    def du_x(t, x):
        s = _offset(t, x)
        g = s_val(t) + table.integral(b, t, x)
        return a * math.pow(s, a - 1.0) * g + math.pow(s, a) * spec.eval_r(x) * math.pow(s, b)

    def du_tx(t, x):
        s = _offset(t, x)
        g = s_val(t) + table.integral(b, t, x)
        a2 = table.integral(c, t, x)
        r = spec.eval_r(x)
        return (
            a * (a - 1.0) * math.pow(s, a - 2.0) * g
            + a * math.pow(s, a - 1.0) * r * math.pow(s, b)
            + a * math.pow(s, a - 1.0) * (ds_val(t) + a2 / k)
            + math.pow(s, a) * r * math.pow(s, c) / k
        )

    return ScalarField(value, du_t=du_t, du_x=du_x, du_tx=du_tx)


def general_solution_u(spec: SolutionSpec) -> ScalarField:
    """The closed-form solution family of the Euler-Poisson equation:

        u = (t+x)^b (kappa*S'(t) + A2) - (t+x)^c (S(t) + A1)

    with b = 1/kappa and c = (1-kappa)/kappa.  Exact u_t, u_x, u_tx are
    attached (the explicit R terms cancel out of u_x and u_tx; u_t needs
    the third cumulative integral I(alpha0) for d/dt A2).
    """
    k = spec.kappa
    b = spec.alpha1
    c = spec.alpha2
    a0 = spec.alpha0
    ds = differentiate(spec.s_expr, "t")
    dds = differentiate(ds, "t")
    table = AntiderivativeTable(spec)

    def parts(t, x):
        s = _offset(t, x)
        first = k * evaluate(ds, {"t": t}) + table.integral(c, t, x)
        second = spec.eval_s(t) + table.integral(b, t, x)
        return s, first, second

    def value(t, x):
        s, first, second = parts(t, x)
        return math.pow(s, b) * first - math.pow(s, c) * second

    def d_first(t, x):
        # d/dt (kappa*S' + A2) = kappa*S'' + alpha2 * I(alpha0)
        return k * evaluate(dds, {"t": t}) + c * table.integral(a0, t, x)

    def d_second(t, x):
        # d/dt (S + A1) = S' + A2/kappa
        return evaluate(ds, {"t": t}) + table.integral(c, t, x) / k

    def du_t(t, x):
        s, first, second = parts(t, x)
        return (
            b * math.pow(s, b - 1.0) * first
            + math.pow(s, b) * d_first(t, x)
            - c * math.pow(s, c - 1.0) * second
            - math.pow(s, c) * d_second(t, x)
        )

    def du_x(t, x):
        s, first, second = parts(t, x)
        return b * math.pow(s, b - 1.0) * first - c * math.pow(s, c - 1.0) * second

    def du_tx(t, x):
        s, first, second = parts(t, x)
        return (
            b * (b - 1.0) * math.pow(s, b - 2.0) * first
            + b * math.pow(s, b - 1.0) * d_first(t, x)
            - c * (c - 1.0) * math.pow(s, c - 2.0) * second
            - c * math.pow(s, c - 1.0) * d_second(t, x)
        )

    return ScalarField(value, du_t=du_t, du_x=du_x, du_tx=du_tx)


def cascade_w_field(spec: SolutionSpec) -> ScalarField:
    """w = v_x + (2*kappa-1)/(kappa*(t+x)) v on the general solution v.

    Analytically w = R(x) (t+x)^(2*(1-kappa)/kappa), so it solves the
    intermediate ODE; the field is built from v's exact partials, with an
    exact w_t attached.
    """
    k = spec.kappa
    v = general_solution_v(spec)

    def value(t, x):
        s = _offset(t, x)
        return v.du_x(t, x) + (2.0 * k - 1.0) / (k * s) * v(t, x)

    def du_t(t, x):
        s = _offset(t, x)
        coef = (2.0 * k - 1.0) / k
        return v.du_tx(t, x) + coef / s * v.du_t(t, x) - coef / (s * s) * v(t, x)

    return ScalarField(value, du_t=du_t)


def parametric_hs_solution(
    spec: SolutionSpec, p: Point, *, table: Optional[AntiderivativeTable] = None
) -> tuple[float, float, float]:
    """Parametric solution surface of the nonlinear equation:

        t~ = t/kappa
        x~ = -kappa (S(t) + A1)
        u~ = kappa^2 S'(t) + kappa A2

    Returned as (t~, x~, u~).  With S = R = 0 the map degenerates
    (x~ loses its x dependence); pushforward construction rejects that.
    """
    k = spec.kappa
    a1, a2 = antiderivative_pair(spec, p, table=table)
    ds = differentiate(spec.s_expr, "t")
    t_t = p.t / k
    x_t = -k * (spec.eval_s(p.t) + a1)
    u_t = k * k * evaluate(ds, {"t": p.t}) + k * a2
    return t_t, x_t, u_t
