"""Second-order jets (value, first, second derivative) and AST evaluation.

A `Jet2` is the truncated Taylor data of a function at a point. Propagating
jets through an expression tree yields exact derivatives (forward-mode
automatic differentiation at order two), with no symbolic expression swell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .expr import Bin, Call, Const, EvalError, Neg, Node, Var


@dataclass(frozen=True)
class Jet2:
    v: float
    d1: float
    d2: float

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.v + other.v, self.d1 + other.d1, self.d2 + other.d2)

    def __sub__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.v - other.v, self.d1 - other.d1, self.d2 - other.d2)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.v, -self.d1, -self.d2)

    def __mul__(self, other: "Jet2") -> "Jet2":
        return Jet2(
            self.v * other.v,
            self.d1 * other.v + self.v * other.d1,
            self.d2 * other.v + 2.0 * self.d1 * other.d1 + self.v * other.d2,
        )

    def __truediv__(self, other: "Jet2") -> "Jet2":
        q = self.v / other.v
        q1 = (self.d1 - q * other.d1) / other.v
        q2 = (self.d2 - 2.0 * q1 * other.d1 - q * other.d2) / other.v
        return Jet2(q, q1, q2)


def jet_const(c: float) -> Jet2:
    return Jet2(c, 0.0, 0.0)


def jet_var(t: float) -> Jet2:
    return Jet2(t, 1.0, 0.0)


def _chain(f: Jet2, u: float, du: float, d2u: float) -> Jet2:
    """Compose an outer scalar function (u, u', u'' at f.v) with the jet f."""
    return Jet2(u, du * f.d1, d2u * f.d1 * f.d1 + du * f.d2)


def jexp(f: Jet2) -> Jet2:
    e = math.exp(f.v)
    return _chain(f, e, e, e)


def jlog(f: Jet2) -> Jet2:
    return _chain(f, math.log(f.v), 1.0 / f.v, -1.0 / (f.v * f.v))


def jsqrt(f: Jet2) -> Jet2:
    s = math.sqrt(f.v)
    return _chain(f, s, 0.5 / s, -0.25 / (s * f.v))


def jsinh(f: Jet2) -> Jet2:
    return _chain(f, math.sinh(f.v), math.cosh(f.v), math.sinh(f.v))


def jcosh(f: Jet2) -> Jet2:
    return _chain(f, math.cosh(f.v), math.sinh(f.v), math.cosh(f.v))


def jtanh(f: Jet2) -> Jet2:
    t = math.tanh(f.v)
    s2 = 1.0 - t * t
    return _chain(f, t, s2, -2.0 * t * s2)


def jpow_const(f: Jet2, k: float) -> Jet2:
    """f^k for a constant exponent; integer k is valid for any base."""
    if k == int(k) and abs(k) < 1024:
        ki = int(k)
        u = float(f.v**ki)
        du = ki * f.v ** (ki - 1) if ki != 0 else 0.0
        d2u = ki * (ki - 1) * f.v ** (ki - 2) if ki not in (0, 1) else 0.0
        return _chain(f, u, float(du), float(d2u))
    u = math.pow(f.v, k)
    return _chain(f, u, k * math.pow(f.v, k - 1.0), k * (k - 1.0) * math.pow(f.v, k - 2.0))


_JET_FUNCS = {
    "exp": jexp,
    "log": jlog,
    "sqrt": jsqrt,
    "sinh": jsinh,
    "cosh": jcosh,
    "tanh": jtanh,
}

_VAL_FUNCS = {
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tanh": math.tanh,
}


def eval_value(node: Node, t: float) -> float:
    """Evaluate the tree at t (value only)."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return t
    if isinstance(node, Neg):
        return -eval_value(node.arg, t)
    if isinstance(node, Call):
        a = eval_value(node.arg, t)
        if node.fn == "log" and a <= 0.0:
            raise EvalError("log of non-positive value", node, a)
        if node.fn == "sqrt" and a < 0.0:
            raise EvalError("sqrt of negative value", node, a)
        try:
            return _VAL_FUNCS[node.fn](a)
        except OverflowError:
            raise EvalError("overflow", node, a) from None
    assert isinstance(node, Bin)
    a = eval_value(node.left, t)
    b = eval_value(node.right, t)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if b == 0.0:
            raise EvalError("division by zero", node, t)
        return a / b
    # power
    if b == int(b) and abs(b) < 1024:
        if a == 0.0 and b < 0:
            raise EvalError("zero raised to negative power", node, t)
        try:
            return float(a ** int(b))
        except OverflowError:
            raise EvalError("overflow", node, a) from None
    if a <= 0.0:
        raise EvalError("non-integer power of non-positive base", node, a)
    try:
        return math.pow(a, b)
    except OverflowError:
        raise EvalError("overflow", node, a) from None


def eval_jet(node: Node, t: float) -> Jet2:
    """Evaluate the tree at t, propagating a second-order jet."""
    if isinstance(node, Const):
        return jet_const(node.value)
    if isinstance(node, Var):
        return jet_var(t)
    if isinstance(node, Neg):
        return -eval_jet(node.arg, t)
    if isinstance(node, Call):
        a = eval_jet(node.arg, t)
        if node.fn == "log" and a.v <= 0.0:
            raise EvalError("log of non-positive value", node, a.v)
        if node.fn == "sqrt" and a.v < 0.0:
            raise EvalError("sqrt of negative value", node, a.v)
        if node.fn == "sqrt" and a.v == 0.0:
            raise EvalError("sqrt not differentiable at zero", node, a.v)
        try:
            return _JET_FUNCS[node.fn](a)
        except OverflowError:
            raise EvalError("overflow", node, a.v) from None
    assert isinstance(node, Bin)
    a = eval_jet(node.left, t)
    if node.op == "^" and isinstance(node.right, Const):
        k = node.right.value
        if a.v == 0.0 and k < 2.0 and k != 0.0 and k != 1.0:
            raise EvalError("power not differentiable at zero base", node, a.v)
        if a.v < 0.0 and k != int(k):
            raise EvalError("non-integer power of negative base", node, a.v)
        if a.v == 0.0 and k != int(k):
            raise EvalError("power not differentiable at zero base", node, a.v)
        try:
            return jpow_const(a, k)
        except (OverflowError, ZeroDivisionError):
            raise EvalError("overflow", node, a.v) from None
    b = eval_jet(node.right, t)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if b.v == 0.0:
            raise EvalError("division by zero", node, t)
        return a / b
    # general power with a non-constant exponent: a^b = exp(b*log(a)), a > 0
    if a.v <= 0.0:
        raise EvalError("non-integer power of non-positive base", node, a.v)
    try:
        return jexp(b * jlog(a))
    except OverflowError:
        raise EvalError("overflow", node, a.v) from None
