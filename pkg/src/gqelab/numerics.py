"""Shared numerical primitives: quadrature, root bracketing, finite differences."""

from __future__ import annotations

import math
from typing import Callable


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge within the bisection cap."""


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, abs(b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _asr(f, a, fa, b, fb, eps, whole, m, fm, depth, budget):
    budget[0] -= 1
    if budget[0] <= 0:
        raise QuadratureError(
            f"quadrature effort cap exhausted near [{a}, {b}] (integrand too singular)")
    lm, flm, left = _simpson(f, a, fa, m, fm)
    rm, frm, right = _simpson(f, m, fm, b, fb)
    delta = left + right - whole
    if not math.isfinite(delta):
        raise QuadratureError(f"non-finite integrand near [{a}, {b}]")
    if abs(delta) <= 15.0 * eps:
        return left + right + delta / 15.0
    if depth <= 0:
        # a 2^-40 sliver missing its halved local budget by a small factor is
        # harmless for the global tolerance; only a real failure raises
        if abs(delta) <= 15.0 * eps * 64.0:
            return left + right + delta / 15.0
        raise QuadratureError(f"interval bisection cap reached on [{a}, {b}] (residual {delta:.3e})")
    return _asr(f, a, fa, m, fm, 0.5 * eps, left, lm, flm, depth - 1, budget) + _asr(
        f, m, fm, b, fb, 0.5 * eps, right, rm, frm, depth - 1, budget
    )


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 40,
                     max_intervals: int = 200_000) -> float:
    """Integrate f over [a, b] with adaptive Simpson refinement.

    `tol` is an absolute tolerance; intervals are bisected (to at most
    2**max_depth pieces) until the local Richardson estimate passes. The
    interval budget bounds total work so that integrands with a
    non-integrable-in-practice singularity fail fast instead of thrashing.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    return sign * _asr(f, a, fa, b, fb, tol, whole, m, fm, max_depth, [max_intervals])


class Antiderivative:
    """Cumulative antiderivative t -> integral of f from t0 to t.

    Values at evenly spaced knots are accumulated once with adaptive Simpson;
    a query integrates only the short leg from its knot (the step is small
    enough that the leg usually converges without splitting). Query results
    are memoized, which matters when antiderivatives are nested.
    """

    # legs are at most one knot step of a smooth integrand, so a small
    # interval budget suffices and keeps nested antiderivatives from
    # thrashing when an integrand turns out to be singular
    _LEG_INTERVALS = 500

    def __init__(self, f: Callable[[float], float], t0: float,
                 tol: float = 1e-10, step: float = 0.0625):
        self._f = f
        self._t0 = t0
        self._tol = tol / 8.0
        self._step = step
        self._table = {0: 0.0}
        self._kmin = 0
        self._kmax = 0
        self._memo: dict[float, float] = {}

    def _knot_value(self, k: int) -> float:
        t0, h = self._t0, self._step
        while self._kmax < k:
            j = self._kmax
            self._table[j + 1] = self._table[j] + adaptive_simpson(
                self._f, t0 + j * h, t0 + (j + 1) * h, self._tol,
                max_intervals=self._LEG_INTERVALS)
            self._kmax += 1
        while self._kmin > k:
            j = self._kmin
            self._table[j - 1] = self._table[j] - adaptive_simpson(
                self._f, t0 + (j - 1) * h, t0 + j * h, self._tol,
                max_intervals=self._LEG_INTERVALS)
            self._kmin -= 1
        return self._table[k]

    def __call__(self, t: float) -> float:
        cached = self._memo.get(t)
        if cached is not None:
            return cached
        # truncate toward t0 so the knot never overshoots t (or its domain)
        k = int((t - self._t0) / self._step)
        a = self._t0 + k * self._step
        value = self._knot_value(k) + adaptive_simpson(
            self._f, a, t, self._tol, max_intervals=self._LEG_INTERVALS)
        self._memo[t] = value
        return value


def bisect_monotone(f: Callable[[float], float], target: float, lo: float, hi: float,
                    tol: float = 1e-12, max_iter: int = 200) -> float:
    """Solve f(t) = target for monotone f on the bracket [lo, hi]."""
    flo, fhi = f(lo) - target, f(hi) - target
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError(f"bracket [{lo}, {hi}] does not enclose the target {target}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid) - target
        if fm == 0.0 or (hi - lo) <= tol * (1.0 + abs(mid)):
            return mid
        if (fm > 0.0) == (fhi > 0.0):
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def central_d1(f: Callable[[float], float], t: float, h: float) -> float:
    return (f(t + h) - f(t - h)) / (2.0 * h)


def central_d2(f: Callable[[float], float], t: float, h: float) -> float:
    return (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
