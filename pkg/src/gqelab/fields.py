"""Scalar fields on R^n built from 1-D profiles through a symmetry class.

Two symmetric kinds are supported, plus a general escape hatch:

* radial fields are functions of r = ||x||^2 — note the SQUARED norm, the
  single most slip-prone convention in this codebase;
* translation fields are functions of u = alpha . x for a fixed direction
  alpha with a = sum(alpha_k^2) > 0;
* explicit fields wrap an arbitrary callable, with derivatives by central
  differences (step 1e-5 * (1 + ||x||)).

Fields are immutable after construction; concurrent evaluation is safe.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .profiles import Profile1D

RADIAL = "radial"
TRANSLATION = "translation"
EXPLICIT = "explicit"

_EXPLICIT_STEP = 1e-5


class FieldJet(NamedTuple):
    value: float
    gradient: np.ndarray
    hessian: np.ndarray


class ScalarFieldRn:
    """A scalar field on R^n exposing value, gradient and Hessian at points."""

    __slots__ = ("kind", "n", "profile", "alpha", "a", "_fn")

    def __init__(self, kind: str, n: int, profile: Profile1D | None = None,
                 alpha: np.ndarray | None = None,
                 fn: Callable[[np.ndarray], float] | None = None):
        if n < 3:
            raise ValueError(f"dimension must be >= 3, got {n}")
        self.kind = kind
        self.n = int(n)
        self.profile = profile
        self.alpha = alpha
        self.a = float(alpha @ alpha) if alpha is not None else 0.0
        self._fn = fn

    @classmethod
    def radial(cls, profile: Profile1D, n: int) -> "ScalarFieldRn":
        return cls(RADIAL, n, profile=profile)

    @classmethod
    def translation(cls, profile: Profile1D, alpha) -> "ScalarFieldRn":
        alpha = np.asarray(alpha, dtype=float)
        if alpha.ndim != 1:
            raise ValueError("direction must be a flat vector")
        if float(alpha @ alpha) <= 0.0:
            raise ValueError("translation direction must satisfy sum(alpha_k^2) > 0")
        return cls(TRANSLATION, alpha.size, profile=profile, alpha=alpha)

    @classmethod
    def explicit(cls, fn: Callable[[np.ndarray], float], n: int) -> "ScalarFieldRn":
        return cls(EXPLICIT, n, fn=fn)

    def _x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.n},)")
        return x

    def argument(self, x) -> float:
        """The profile argument at x: r = ||x||^2 or u = alpha . x."""
        x = self._x(x)
        if self.kind == RADIAL:
            return float(x @ x)
        if self.kind == TRANSLATION:
            return float(self.alpha @ x)
        raise ValueError("explicit fields have no symmetry argument")

    def value(self, x) -> float:
        x = self._x(x)
        if self.kind == RADIAL:
            return self.profile.value(float(x @ x))
        if self.kind == TRANSLATION:
            return self.profile.value(float(self.alpha @ x))
        return float(self._fn(x))

    def jet(self, x) -> FieldJet:
        x = self._x(x)
        if self.kind == RADIAL:
            r = float(x @ x)
            v, p1, p2 = self.profile.jet(r)
            grad = 2.0 * p1 * x
            hess = 2.0 * p1 * np.eye(self.n) + 4.0 * p2 * np.outer(x, x)
            return FieldJet(v, grad, hess)
        if self.kind == TRANSLATION:
            u = float(self.alpha @ x)
            v, p1, p2 = self.profile.jet(u)
            return FieldJet(v, p1 * self.alpha, p2 * np.outer(self.alpha, self.alpha))
        return self._explicit_jet(x)

    def _explicit_jet(self, x: np.ndarray) -> FieldJet:
        n = self.n
        h = _EXPLICIT_STEP * (1.0 + float(np.linalg.norm(x)))
        f0 = float(self._fn(x))
        grad = np.empty(n)
        hess = np.empty((n, n))
        for i in range(n):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            fp, fm = float(self._fn(xp)), float(self._fn(xm))
            grad[i] = (fp - fm) / (2.0 * h)
            hess[i, i] = (fp - 2.0 * f0 + fm) / (h * h)
        for i in range(n):
            for j in range(i + 1, n):
                xpp, xpm, xmp, xmm = x.copy(), x.copy(), x.copy(), x.copy()
                xpp[[i, j]] += h
                xmm[[i, j]] -= h
                xpm[i] += h
                xpm[j] -= h
                xmp[i] -= h
                xmp[j] += h
                val = (float(self._fn(xpp)) - float(self._fn(xpm))
                       - float(self._fn(xmp)) + float(self._fn(xmm))) / (4.0 * h * h)
                hess[i, j] = val
                hess[j, i] = val
        return FieldJet(f0, grad, hess)

    def __repr__(self) -> str:
        tag = self.profile.name if self.profile is not None else "fn"
        return f"ScalarFieldRn({self.kind}, n={self.n}, {tag})"


def field_jet(field: ScalarFieldRn, x) -> FieldJet:
    """Value, coordinate gradient and coordinate Hessian of the field at x."""
    return field.jet(x)
