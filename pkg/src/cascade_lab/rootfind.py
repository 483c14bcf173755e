"""Bracketed root finding for monotone scalar functions.

Used to invert the x -> x~ map of a pushforward solution: expand a bracket
geometrically from the working interval, bisect it down, then polish with
secant steps.  The function is assumed monotone on the search range, which
makes single-sided expansion sound.
"""

from __future__ import annotations

from typing import Callable, Optional

Fn = Callable[[float], float]


class BracketingError(ValueError):
    """No sign change found within the allowed expansion range."""


def bracket_sign_change(
    g: Fn,
    lo: float,
    hi: float,
    *,
    grow: float = 1.6,
    lo_min: Optional[float] = None,
    hi_max: Optional[float] = None,
    max_steps: int = 60,
) -> tuple[float, float]:
    """Find [a, b] with g(a), g(b) of opposite sign, expanding outward.

    Expansion is single-sided, chosen from the slope sign of a monotone g;
    lo_min / hi_max clip the search range (domain walls).
    """
    if not lo < hi:
        raise ValueError("need lo < hi to start bracketing")
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return (lo, lo)
    if ghi == 0.0:
        return (hi, hi)
    if (glo < 0) != (ghi < 0):
        return (lo, hi)
    increasing = ghi > glo
    # Root lies on the side where a monotone g crosses zero.
    go_left = (increasing and glo > 0) or (not increasing and glo < 0)
    step = hi - lo
    for _ in range(max_steps):
        if go_left:
            new = lo - step
            if lo_min is not None:
                new = max(new, lo_min)
            if new == lo:
                break
            gnew = g(new)
            if gnew == 0.0:
                return (new, new)
            if (gnew < 0) != (glo < 0):
                return (new, lo)
            lo, glo = new, gnew
        else:
            new = hi + step
            if hi_max is not None:
                new = min(new, hi_max)
            if new == hi:
                break
            gnew = g(new)
            if gnew == 0.0:
                return (new, new)
            if (gnew < 0) != (ghi < 0):
                return (hi, new)
            hi, ghi = new, gnew
        step *= grow
    raise BracketingError(
        "no sign change found while expanding the bracket "
        f"(reached [{lo!r}, {hi!r}])"
    )


def bisect_secant(
    g: Fn,
    a: float,
    b: float,
    *,
    tol: float,
    max_iter: int = 200,
    bisect_steps: int = 30,
) -> float:
    """Root of g on a sign-change bracket [a, b].

    Bisection shrinks the bracket, then secant steps refine until |g| stops
    improving; the polish deliberately runs past tol so repeated nearby
    inversions are smooth to machine precision.  Raises if the best
    |g| stays above tol.
    """
    if a == b:
        return a
    fa, fb = g(a), g(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa < 0) == (fb < 0):
        raise ValueError("bisect_secant needs a sign-change bracket")
    for _ in range(bisect_steps):
        m = 0.5 * (a + b)
        fm = g(m)
        if fm == 0.0:
            return m
        if (fa < 0) != (fm < 0):
            b, fb = m, fm
        else:
            a, fa = m, fm
    x0, f0, x1, f1 = a, fa, b, fb
    if abs(f0) < abs(f1):
        best_x, best_f = x0, f0
    else:
        best_x, best_f = x1, f1
    for _ in range(max_iter):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        f2 = g(x2)
        if abs(f2) >= abs(best_f):
            break
        best_x, best_f = x2, f2
        if f2 == 0.0:
            break
        x0, f0, x1, f1 = x1, f1, x2, f2
    if abs(best_f) > tol:
        raise BracketingError(
            f"root refinement stalled at |g| = {abs(best_f)!r} > tol = {tol!r}"
        )
    return best_x
