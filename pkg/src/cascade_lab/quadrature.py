"""Adaptive Simpson quadrature with an absolute tolerance.

Classic recursive scheme with Richardson correction: a panel is accepted
when |S(left)+S(right)-S(whole)| <= 15*tol and the result gets the
delta/15 correction.  Subdivision is capped at 2^20 subintervals
(recursion depth 20); hitting the cap raises QuadratureError.
"""

from __future__ import annotations

from typing import Callable

MAX_DEPTH = 20


class QuadratureError(RuntimeError):
    pass


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, abs(b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _recurse(f, a, fa, b, fb, tol, whole, m, fm, depth):
    lm, flm, left = _simpson(f, a, fa, m, fm)
    rm, frm, right = _simpson(f, m, fm, b, fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureError(
            f"adaptive Simpson did not converge on [{a!r}, {b!r}] "
            f"(subdivision cap 2^{MAX_DEPTH} reached)"
        )
    half = tol / 2.0
    return _recurse(f, a, fa, m, fm, half, left, lm, flm, depth - 1) + _recurse(
        f, m, fm, b, fb, half, right, rm, frm, depth - 1
    )


def adaptive_simpson(
    f: Callable[[float], float], a: float, b: float, tol: float, max_depth: int = MAX_DEPTH
) -> float:
    """Integrate f over [a, b] to absolute tolerance tol (signed if b < a)."""
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth)
    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    return _recurse(f, a, fa, b, fb, tol, whole, m, fm, max_depth)
