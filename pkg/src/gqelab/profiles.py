"""One-variable profile functions with first and second derivatives.

A `Profile1D` packages a scalar function on an open interval together with
its first two derivatives. Profiles come from a small named catalog, from a
parsed expression (derivatives via second-order jets, exact to rounding), or
from an arbitrary callable (derivatives via central differences).
"""

from __future__ import annotations

import math
from typing import Callable

from . import expr, jets
from .numerics import bisect_monotone, central_d1, central_d2

_INF = math.inf


class DomainError(ValueError):
    """Evaluation requested outside a profile's declared open interval."""


class Profile1D:
    """Scalar function of one variable with d1/d2, total on an open domain."""

    __slots__ = ("_value", "_d1", "_d2", "domain", "name")

    def __init__(self, value: Callable[[float], float], d1: Callable[[float], float],
                 d2: Callable[[float], float], domain: tuple[float, float] = (-_INF, _INF),
                 name: str = "profile"):
        lo, hi = domain
        if not lo < hi:
            raise ValueError(f"empty domain {domain}")
        self._value = value
        self._d1 = d1
        self._d2 = d2
        self.domain = (float(lo), float(hi))
        self.name = name

    def _check(self, t: float) -> float:
        t = float(t)
        lo, hi = self.domain
        if not (lo < t < hi):
            raise DomainError(f"{self.name}: argument {t} outside open domain ({lo}, {hi})")
        return t

    def __call__(self, t: float) -> float:
        return self._value(self._check(t))

    def value(self, t: float) -> float:
        return self._value(self._check(t))

    def d1(self, t: float) -> float:
        return self._d1(self._check(t))

    def d2(self, t: float) -> float:
        return self._d2(self._check(t))

    def jet(self, t: float) -> tuple[float, float, float]:
        t = self._check(t)
        return self._value(t), self._d1(t), self._d2(t)

    def __repr__(self) -> str:
        return f"Profile1D({self.name!r}, domain={self.domain})"


def parse_profile(text: str, varname: str = "t",
                  domain: tuple[float, float] = (-_INF, _INF)) -> Profile1D:
    """Build a profile from an expression string in the variable `varname`.

    Derivatives are propagated through the syntax tree as second-order jets,
    so they are exact up to rounding. No pole analysis is attempted: the
    domain defaults to the whole line and runtime evaluation errors identify
    the offending sub-expression.
    """
    tree = expr.parse_expression(text, varname)

    def d1(t: float) -> float:
        return jets.eval_jet(tree, t).d1

    def d2(t: float) -> float:
        return jets.eval_jet(tree, t).d2

    return Profile1D(lambda t: jets.eval_value(tree, t), d1, d2,
                     domain=domain, name=expr.to_text(tree))


def constant(c: float) -> Profile1D:
    c = float(c)
    return Profile1D(lambda t: c, lambda t: 0.0, lambda t: 0.0, name=f"const({c})")


def from_callable(fn: Callable[[float], float],
                  domain: tuple[float, float] = (-_INF, _INF),
                  name: str = "callable", h: float = 1e-5) -> Profile1D:
    """Wrap a plain value function; d1/d2 fall back to central differences."""

    def d1(t: float) -> float:
        return central_d1(fn, t, h * (1.0 + abs(t)))

    def d2(t: float) -> float:
        return central_d2(fn, t, h * (1.0 + abs(t)))

    return Profile1D(fn, d1, d2, domain=domain, name=name)


def compose(outer: Profile1D, inner: Profile1D, name: str | None = None) -> Profile1D:
    """outer(inner(t)) with chain-rule jets."""

    def value(t: float) -> float:
        return outer.value(inner.value(t))

    def d1(t: float) -> float:
        iv, i1, _ = inner.jet(t)
        return outer.d1(iv) * i1

    def d2(t: float) -> float:
        iv, i1, i2 = inner.jet(t)
        _, o1, o2 = outer.jet(iv)
        return o2 * i1 * i1 + o1 * i2

    return Profile1D(value, d1, d2, domain=inner.domain,
                     name=name or f"{outer.name}∘{inner.name}")


def scale_argument(p: Profile1D, k: float, name: str | None = None) -> Profile1D:
    """t -> p(k*t); used to reparametrize profiles between variables."""
    if k == 0.0:
        raise ValueError("argument scale must be nonzero")
    lo, hi = p.domain
    dom = (lo / k, hi / k) if k > 0 else (hi / k, lo / k)
    return Profile1D(lambda t: p.value(k * t),
                     lambda t: k * p.d1(k * t),
                     lambda t: k * k * p.d2(k * t),
                     domain=dom, name=name or f"{p.name}(scaled)")


def invert_monotone(p: Profile1D, y: float, bracket: tuple[float, float],
                    tol: float = 1e-12) -> float:
    """Solve p(t) = y by bisection; p must be monotone on the bracket."""
    return bisect_monotone(p.value, y, bracket[0], bracket[1], tol=tol)


def inverse_profile(p: Profile1D, bracket: tuple[float, float],
                    tol: float = 1e-12) -> Profile1D:
    """Inverse of a strictly monotone profile on a bracket.

    Derivatives come from implicit differentiation, so they inherit the
    accuracy of p's jets rather than of the bisection.
    """
    lo = min(p.value(bracket[0]), p.value(bracket[1]))
    hi = max(p.value(bracket[0]), p.value(bracket[1]))

    def tval(y: float) -> float:
        return invert_monotone(p, y, bracket, tol=tol)

    def d1(y: float) -> float:
        return 1.0 / p.d1(tval(y))

    def d2(y: float) -> float:
        t = tval(y)
        g1 = p.d1(t)
        return -p.d2(t) / (g1 * g1 * g1)

    return Profile1D(tval, d1, d2, domain=(lo, hi), name=f"{p.name}^-1")


def catalog() -> dict[str, Profile1D]:
    """Named profiles used by the built-in charts and examples."""
    return {
        "one": constant(1.0),
        "linear": parse_profile("t", "t"),
        "gauss": parse_profile("exp(-t^2/2)", "t"),
        "inv1p": parse_profile("1/(1+t)", "t", domain=(-1.0, _INF)),
        "tanh1p": parse_profile("1+tanh(t)", "t"),
        "sphere_chart": parse_profile("(1+t)/2", "t"),
        "ball_chart": parse_profile("(1-t)/2", "t", domain=(-_INF, 1.0)),
        "height": parse_profile("(t-1)/(t+1)", "t", domain=(-1.0, _INF)),
    }


def resolve_profile(spec: str, varname: str,
                    domain: tuple[float, float] | None = None) -> Profile1D:
    """Resolve a CLI/config profile reference: catalog name or inline expression."""
    entries = catalog()
    if spec in entries:
        p = entries[spec]
        if domain is not None:
            return Profile1D(p._value, p._d1, p._d2, domain=domain, name=p.name)
        return p
    return parse_profile(spec, varname, domain=domain or (-_INF, _INF))
