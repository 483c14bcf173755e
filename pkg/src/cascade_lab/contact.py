"""The contact transformation between the linear and nonlinear sides.

The forward map Psi sends a source 1-jet (t, x, u, u_t, u_x) with
s = t + x > 0 to the tilded jet

    u~   = s^(-1/k) (k s u_x + (k-1) u)
    t~   = t / k
    x~   = -s^((k-1)/k) (k s u_x - u)
    u~_t = k^2 s^(-1/k) (u_t - u_x)
    u~_x = -1/s

(k = kappa).  Its inverse is derived by solving those relations:
s = -1/u~_x fixes the position, and the pair (u~, x~) is linear in
(u, u_x).  The pullback check verifies that Psi preserves the contact
ideal: the pullback of du~ - u~_t dt~ - u~_x dx~ equals
lambda * (du - u_t dt - u_x dx) with lambda = k s^(-1/k).

Pushforward solutions make the parametric solution surface explicit by
inverting x -> x~ at fixed t with bracketed root finding; that needs R to
be sign-definite on the working interval, since dx~/dx = -k R(x) s^(1/k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .fields import Jet1, Point, ScalarField, SingularDomainError
from .laplace import (
    AntiderivativeTable,
    SolutionSpec,
    parametric_hs_solution,
)
from .rootfind import BracketingError, bisect_secant, bracket_sign_change


class ImageConditionError(ValueError):
    """A tilded jet with u~_x >= 0 lies outside the image of Psi."""


class DegenerateSolutionError(ValueError):
    """R is not sign-definite, so the x -> x~ map cannot be inverted."""


class UnattainableTargetError(ValueError):
    """The requested x~ is outside the attainable range of the x~ map."""


@dataclass(frozen=True)
class TildedJet1:
    """A 1-jet in the tilded coordinates (t~, x~, u~, u~_t~, u~_x~)."""

    t: float
    x: float
    u: float
    u_t: float
    u_x: float


def _check(j: Jet1, kappa: float) -> float:
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    s = j.t + j.x
    if s <= 0:
        raise SingularDomainError(
            f"source jets need t + x > 0 (got t={j.t!r}, x={j.x!r})"
        )
    return s


def psi_forward(j: Jet1, kappa: float) -> TildedJet1:
    """Apply the five component maps of Psi to a source jet."""
    s = _check(j, kappa)
    k = kappa
    inv = math.pow(s, -1.0 / k)
    grow = math.pow(s, (k - 1.0) / k)
    return TildedJet1(
        t=j.t / k,
        x=-grow * (k * s * j.u_x - j.u),
        u=inv * (k * s * j.u_x + (k - 1.0) * j.u),
        u_t=k * k * inv * (j.u_t - j.u_x),
        u_x=-1.0 / s,
    )


def psi_inverse(jt: TildedJet1, kappa: float) -> Jet1:
    """Invert Psi on its image (u~_x < 0); round-trips to round-off."""
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    if not jt.u_x < 0:
        raise ImageConditionError(
            f"u~_x must be negative on the image of the map (got {jt.u_x!r})"
        )
    k = kappa
    s = -1.0 / jt.u_x
    t = k * jt.t
    x = s - t
    pow_b = math.pow(s, 1.0 / k)
    pow_c = math.pow(s, (1.0 - k) / k)
    u = (jt.u * pow_b + jt.x * pow_c) / k
    u_x = (u - jt.x * pow_c) / (k * s)
    u_t = u_x + jt.u_t * pow_b / (k * k)
    return Jet1(t, x, u, u_t, u_x)


def _map_partials_exact(j: Jet1, kappa: float):
    """Closed-form partials of the maps (u~, t~, x~) in the jet coordinates.

    Returns ((du~/dt, du~/dx, du~/du, du~/du_t, du~/du_x), same for t~, x~).
    t and x enter only through s = t + x, so the t and x rows coincide
    except for dt~/dt = 1/kappa.
    """
    s = _check(j, kappa)
    k = kappa
    u, p = j.u, j.u_x
    inv = math.pow(s, -1.0 / k)
    g = math.pow(s, (k - 1.0) / k)
    g2 = math.pow(s, (2.0 * k - 1.0) / k)
    ut_s = (k - 1.0) * inv * (p - u / (k * s))
    ut_u = (k - 1.0) * inv
    ut_p = k * g
    xt_s = -(2.0 * k - 1.0) * p * g + ((k - 1.0) / k) * u * inv
    xt_u = g
    xt_p = -k * g2
    d_ut = (ut_s, ut_s, ut_u, 0.0, ut_p)
    d_tt = (1.0 / k, 0.0, 0.0, 0.0, 0.0)
    d_xt = (xt_s, xt_s, xt_u, 0.0, xt_p)
    return d_ut, d_tt, d_xt


def _map_partials_fd(j: Jet1, kappa: float, h: float):
    names = ("t", "x", "u", "u_t", "u_x")
    d_ut, d_tt, d_xt = [], [], []
    for name in names:
        base = getattr(j, name)
        plus = psi_forward(replace(j, **{name: base + h}), kappa)
        minus = psi_forward(replace(j, **{name: base - h}), kappa)
        d_ut.append((plus.u - minus.u) / (2 * h))
        d_tt.append((plus.t - minus.t) / (2 * h))
        d_xt.append((plus.x - minus.x) / (2 * h))
    return tuple(d_ut), tuple(d_tt), tuple(d_xt)


def pullback_check(
    j: Jet1, kappa: float, *, method: str = "exact", fd_step: float = 1e-6
) -> tuple[float, float]:
    """Contact-ideal preservation test at a jet.

    Computes the five coefficients (on dt, dx, du, du_t, du_x) of the
    pullback of du~ - u~_t dt~ - u~_x dx~ and compares them against
    lambda * (-u_t, -u_x, 1, 0, 0) where lambda is the du coefficient.
    Returns (lambda, max coefficient residual).  method="fd" replaces the
    closed-form map partials with central differences of step fd_step.
    """
    if method == "exact":
        d_ut, d_tt, d_xt = _map_partials_exact(j, kappa)
    elif method == "fd":
        d_ut, d_tt, d_xt = _map_partials_fd(j, kappa, fd_step)
    else:
        raise ValueError(f"unknown method {method!r}; expected 'exact' or 'fd'")
    image = psi_forward(j, kappa)
    coeffs = tuple(
        d_ut[i] - image.u_t * d_tt[i] - image.u_x * d_xt[i] for i in range(5)
    )
    lam = coeffs[2]
    targets = (-lam * j.u_t, -lam * j.u_x, lam, 0.0, 0.0)
    residual = max(abs(c - w) for c, w in zip(coeffs, targets))
    return lam, residual


class PushforwardSolution:
    """An explicit solution u~(t~, x~) obtained by inverting the x~ map.

    Wraps a SolutionSpec with the inversion controls: the working
    x-interval [x_lo, x_hi], the geometric bracket expansion factor, the
    root tolerance on the x~ mismatch, and the iteration cap.  R must be
    sign-definite on the working interval (checked by sampling at
    construction); otherwise the map is not invertible.
    """

    def __init__(
        self,
        spec: SolutionSpec,
        x_lo: float = 0.1,
        x_hi: float = 10.0,
        *,
        bracket_growth: float = 1.6,
        root_tol: float = 1e-12,
        max_iter: int = 200,
        sign_samples: int = 101,
    ):
        if not x_lo < x_hi:
            raise ValueError("need x_lo < x_hi")
        if bracket_growth <= 1.0:
            raise ValueError("bracket growth factor must exceed 1")
        self.spec = spec
        self.x_lo = x_lo
        self.x_hi = x_hi
        self.bracket_growth = bracket_growth
        self.root_tol = root_tol
        self.max_iter = max_iter
        self._table = AntiderivativeTable(spec)
        step = (x_hi - x_lo) / (sign_samples - 1)
        values = [spec.eval_r(x_lo + i * step) for i in range(sign_samples)]
        if all(v == 0.0 for v in values):
            raise DegenerateSolutionError(
                "R vanishes identically: x~ does not depend on x and the "
                "parametric surface cannot be made explicit"
            )
        if min(values) <= 0.0 <= max(values):
            raise DegenerateSolutionError(
                f"R must be sign-definite on [{x_lo!r}, {x_hi!r}]"
            )

    def x_tilde(self, t: float, x: float) -> float:
        """The x~ component of the parametric map at fixed t."""
        spec = self.spec
        a1 = self._table.integral(spec.alpha1, t, x)
        return -spec.kappa * (spec.eval_s(t) + a1)

    def source_point(self, t_tilde: float, x_tilde: float) -> Point:
        """Recover the source point (t, x) mapping to (t~, x~)."""
        t = self.spec.kappa * t_tilde
        floor = -t + 1e-9 * max(1.0, abs(t))
        lo = max(self.x_lo, floor)
        hi = self.x_hi
        if not lo < hi:
            raise UnattainableTargetError(
                f"working x-interval collapses at t={t!r} (t + x > 0 required)"
            )

        def g(x: float) -> float:
            return self.x_tilde(t, x) - x_tilde

        try:
            a, b = bracket_sign_change(
                g,
                lo,
                hi,
                grow=self.bracket_growth,
                lo_min=floor,
                max_steps=self.max_iter,
            )
            x = bisect_secant(g, a, b, tol=self.root_tol, max_iter=self.max_iter)
        except BracketingError as exc:
            raise UnattainableTargetError(
                f"x~ = {x_tilde!r} is outside the attainable range of the "
                f"x~ map at t~ = {t_tilde!r}: {exc}"
            ) from exc
        return Point(t, x)


def pushforward_evaluate(ps: PushforwardSolution, t_tilde: float, x_tilde: float) -> float:
    """u~ at (t~, x~), via root-finding on the x~ map."""
    p = ps.source_point(t_tilde, x_tilde)
    _, _, u_t = parametric_hs_solution(ps.spec, p, table=ps._table)
    return u_t


def pushforward_field(ps: PushforwardSolution) -> ScalarField:
    """The explicit solution as a field in (t~, x~).

    No exact partials are attached on purpose: grid verification of this
    field must run on pure finite differences to stay an independent check.
    """
    return ScalarField(lambda tt, xt: pushforward_evaluate(ps, tt, xt))
