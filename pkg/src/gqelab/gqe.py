"""Generalized quasi-Einstein structures and their verification primitives.

A structure is a bundle (n, phi, f, nu, lambda) of scalar fields on R^n for
the conformal metric g = delta / phi^2, to be checked against the defining
equation

    Ric + Hess_g f - nu df (x) df = lambda g.

The two family closures produce the unique (nu, lambda) making a radial or
translation-invariant (phi, f) pair a solution, together with the scalar
curvature profile. When nu factors through f (nu = v o f), the potential
change u = phi_v o f turns the defining equation into
Ric + (1 / phi_v'(f)) Hess_g u = lambda g with the same lambda, which is the
basis of the transformed-residual and traceless-gap checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import geometry
from .fields import RADIAL, TRANSLATION, ScalarFieldRn
from .geometry import ConformalMetric, SymTensor
from .kernels import gqe_residual
from .numerics import Antiderivative, bisect_monotone
from .profiles import Profile1D, compose, from_callable

_FPRIME_FLOOR = 1e-14


class DegenerateStructureError(ValueError):
    """A closure precondition failed (vanishing f' or phi, zero direction)."""


@dataclass(frozen=True)
class GQEStructure:
    """Candidate solution bundle; all fields share the dimension n."""

    n: int
    phi: ScalarFieldRn
    f: ScalarFieldRn
    nu: ScalarFieldRn
    lam: ScalarFieldRn

    @property
    def metric(self) -> ConformalMetric:
        return ConformalMetric(self.phi)

    def with_lambda_offset(self, offset: float) -> "GQEStructure":
        """A deliberately broken copy with lambda shifted by a constant."""
        base = self.lam
        shifted = ScalarFieldRn.explicit(lambda x: base.value(x) + offset, self.n)
        return GQEStructure(self.n, self.phi, self.f, self.nu, shifted)


def residual_at(s: GQEStructure, x) -> SymTensor:
    """Ric + Hess_g f - nu df(x)df - lambda g at x; zero iff the equation holds."""
    m = s.metric
    pj = m.phi_jet(x)
    fj = s.f.jet(x)
    return SymTensor(gqe_residual(pj.value, pj.gradient, pj.hessian,
                                  fj.gradient, fj.hessian,
                                  s.nu.value(x), s.lam.value(x)))


def _jets_or_raise(phi: Profile1D, f: Profile1D, t: float):
    pv, p1, p2 = phi.jet(t)
    fv, f1, f2 = f.jet(t)
    if abs(pv) <= 1e-300:
        raise DegenerateStructureError(f"conformal profile vanishes at argument {t}")
    if abs(f1) <= _FPRIME_FLOOR:
        raise DegenerateStructureError(f"potential profile is stationary at argument {t}")
    return pv, p1, p2, fv, f1, f2


def radial_closure(phi: Profile1D, f: Profile1D, n: int,
                   ) -> tuple[Profile1D, Profile1D, Profile1D]:
    """The unique (nu, lambda) closing a radial pair, plus the curvature profile.

    Arguments of all three outputs are r = ||x||^2. Values are exact in the
    input jets; the outputs' own derivatives fall back to central differences
    (third derivatives of phi and f are outside the profile contract).
    """
    lo = max(phi.domain[0], f.domain[0])
    hi = min(phi.domain[1], f.domain[1])

    def nu_value(t: float) -> float:
        pv, p1, p2, _, f1, f2 = _jets_or_raise(phi, f, t)
        return ((n - 2.0) * p2 / pv + f2 + 2.0 * f1 * p1 / pv) / (f1 * f1)

    def lam_value(t: float) -> float:
        pv, p1, p2, _, f1, _ = _jets_or_raise(phi, f, t)
        return 4.0 * ((n - 1.0) * p1 * (pv - t * p1) + t * pv * (p2 - f1 * p1)) + 2.0 * f1 * pv * pv

    def s_value(t: float) -> float:
        pv, p1, p2 = phi.jet(t)
        return 4.0 * (n - 1.0) * (2.0 * t * pv * p2 - n * t * p1 * p1 + n * pv * p1)

    return (from_callable(nu_value, domain=(lo, hi), name="nu(r)"),
            from_callable(lam_value, domain=(lo, hi), name="lambda(r)"),
            from_callable(s_value, domain=(lo, hi), name="S(r)"))


def translation_closure(phi: Profile1D, f: Profile1D, alpha,
                        ) -> tuple[Profile1D, Profile1D, Profile1D]:
    """Closure for a translation-invariant pair; argument is u = alpha . x."""
    alpha = np.asarray(alpha, dtype=float)
    a = float(alpha @ alpha)
    if a <= 0.0:
        raise DegenerateStructureError("translation direction must have sum(alpha_k^2) > 0")
    n = alpha.size
    lo = max(phi.domain[0], f.domain[0])
    hi = min(phi.domain[1], f.domain[1])

    def nu_value(t: float) -> float:
        pv, p1, p2, _, f1, f2 = _jets_or_raise(phi, f, t)
        return ((n - 2.0) * p2 / pv + f2 + 2.0 * f1 * p1 / pv) / (f1 * f1)

    def lam_value(t: float) -> float:
        pv, p1, p2, _, f1, _ = _jets_or_raise(phi, f, t)
        return a * (pv * p2 - f1 * pv * p1 - (n - 1.0) * p1 * p1)

    def s_value(t: float) -> float:
        pv, p1, p2 = phi.jet(t)
        return a * (n - 1.0) * (2.0 * pv * p2 - n * p1 * p1)

    return (from_callable(nu_value, domain=(lo, hi), name="nu(u)"),
            from_callable(lam_value, domain=(lo, hi), name="lambda(u)"),
            from_callable(s_value, domain=(lo, hi), name="S(u)"))


def make_radial_structure(phi: Profile1D, f: Profile1D, n: int,
                          ) -> tuple[GQEStructure, Profile1D]:
    """Assemble the closure-produced radial structure and its S profile."""
    nu_p, lam_p, s_p = radial_closure(phi, f, n)
    s = GQEStructure(n,
                     ScalarFieldRn.radial(phi, n),
                     ScalarFieldRn.radial(f, n),
                     ScalarFieldRn.radial(nu_p, n),
                     ScalarFieldRn.radial(lam_p, n))
    return s, s_p


def make_translation_structure(phi: Profile1D, f: Profile1D, alpha,
                               ) -> tuple[GQEStructure, Profile1D]:
    """Assemble the closure-produced translation structure and its S profile."""
    alpha = np.asarray(alpha, dtype=float)
    nu_p, lam_p, s_p = translation_closure(phi, f, alpha)
    n = alpha.size
    s = GQEStructure(n,
                     ScalarFieldRn.translation(phi, alpha),
                     ScalarFieldRn.translation(f, alpha),
                     ScalarFieldRn.translation(nu_p, alpha),
                     ScalarFieldRn.translation(lam_p, alpha))
    return s, s_p


def _gradient_norm2_row(s: GQEStructure, x: np.ndarray) -> np.ndarray:
    """Coordinate gradient of w = ||grad f||_g^2 = phi^2 |d f|^2.

    For shared radial or translation symmetry the derivative is taken on the
    1-D profiles, which keeps the three wedge rows exactly parallel; the
    general case falls back to central differences of the exact w values.
    """
    phi_f, pot = s.phi, s.f
    if phi_f.kind == RADIAL and pot.kind == RADIAL:
        r = float(x @ x)
        pv, p1, _ = phi_f.profile.jet(r)
        _, f1, f2 = pot.profile.jet(r)
        # w(r) = 4 r phi^2 f'^2
        wprime = 4.0 * (pv * pv * f1 * f1
                        + r * (2.0 * pv * p1 * f1 * f1 + 2.0 * pv * pv * f1 * f2))
        return 2.0 * wprime * x
    if (phi_f.kind == TRANSLATION and pot.kind == TRANSLATION
            and np.array_equal(phi_f.alpha, pot.alpha)):
        u = float(phi_f.alpha @ x)
        a = phi_f.a
        pv, p1, _ = phi_f.profile.jet(u)
        _, f1, f2 = pot.profile.jet(u)
        # w(u) = a phi^2 f'^2
        wprime = a * (2.0 * pv * p1 * f1 * f1 + 2.0 * pv * pv * f1 * f2)
        return wprime * phi_f.alpha

    def w(y: np.ndarray) -> float:
        v = phi_f.value(y)
        grad = pot.jet(y).gradient
        return v * v * float(grad @ grad)

    h = 1e-5 * (1.0 + float(np.linalg.norm(x)))
    row = np.empty(s.n)
    for i in range(s.n):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        row[i] = (w(xp) - w(xm)) / (2.0 * h)
    return row


def wedge_invariant_at(s: GQEStructure, x) -> float:
    """Largest 3x3 minor of the gradients of (||grad f||_g^2, nu, f) at x.

    The three-form d||grad f||^2 ^ dnu ^ df vanishes exactly when this is
    zero; any structure whose data factor through one symmetry variable gives
    parallel rows and hence an exactly zero result.
    """
    x = np.asarray(x, dtype=float)
    if s.n < 3:
        raise ValueError("wedge invariant needs n >= 3")
    rows = np.vstack([
        _gradient_norm2_row(s, x),
        s.nu.jet(x).gradient,
        s.f.jet(x).gradient,
    ])
    best = 0.0
    for cols in combinations(range(s.n), 3):
        minor = abs(float(np.linalg.det(rows[:, cols])))
        if minor > best:
            best = minor
    return best


@dataclass(frozen=True)
class PhiTransform:
    """The potential-change data built from nu = v o f.

    phi_of_t solves phi'' + v phi' = 0 with phi'(t0) = c1, phi(t0) = c2:
    phi'(t) = c1 exp(-int_{t0}^t v) and phi(t) = c2 + int_{t0}^t phi'.
    phi' keeps the sign of c1, so phi is strictly monotone.
    """

    v: Profile1D
    c1: float
    c2: float
    t0: float
    phi_of_t: Profile1D
    phiprime_of_t: Profile1D

    def invert(self, y: float, bracket: tuple[float, float], tol: float = 1e-12) -> float:
        """Solve phi_of_t(t) = y on the bracket (monotonicity is guaranteed)."""
        return bisect_monotone(self.phi_of_t.value, y, bracket[0], bracket[1], tol=tol)


def phi_from_v(v: Profile1D, c1: float, c2: float, t0: float = 0.0,
               tol: float = 1e-10) -> PhiTransform:
    """Build the strictly monotone phi with phi'' + v phi' = 0 by quadrature."""
    if c1 == 0.0:
        raise DegenerateStructureError("c1 = 0 makes phi constant (degenerate transform)")
    v_integral = Antiderivative(v.value, t0, tol=tol)
    prime_memo: dict[float, float] = {}

    def phiprime(t: float) -> float:
        val = prime_memo.get(t)
        if val is None:
            val = c1 * float(np.exp(-v_integral(t)))
            prime_memo[t] = val
        if val == 0.0:
            raise DegenerateStructureError(f"phi' underflowed to zero at t = {t}")
        return val

    prime_profile = Profile1D(
        phiprime,
        lambda t: -v.value(t) * phiprime(t),
        lambda t: (v.value(t) ** 2 - v.d1(t)) * phiprime(t),
        domain=v.domain, name="phi'")

    prime_integral = Antiderivative(phiprime, t0, tol=tol)
    phi_profile = Profile1D(
        lambda t: c2 + prime_integral(t),
        phiprime,
        lambda t: -v.value(t) * phiprime(t),
        domain=v.domain, name="phi")

    return PhiTransform(v, float(c1), float(c2), float(t0), phi_profile, prime_profile)


def potential_change_field(pt: PhiTransform, f: ScalarFieldRn) -> ScalarFieldRn:
    """The field u = phi o f sharing f's symmetry."""
    if f.kind == RADIAL:
        return ScalarFieldRn.radial(compose(pt.phi_of_t, f.profile, name="u"), f.n)
    if f.kind == TRANSLATION:
        return ScalarFieldRn.translation(compose(pt.phi_of_t, f.profile, name="u"), f.alpha)
    return ScalarFieldRn.explicit(lambda x: pt.phi_of_t.value(f.value(x)), f.n)


def _check_nu_matches(s: GQEStructure, pt: PhiTransform, x, tol: float = 1e-6) -> float:
    t = s.f.value(x)
    expected = pt.v.value(t)
    if abs(s.nu.value(x) - expected) > tol * (1.0 + abs(expected)):
        raise ValueError("structure's nu does not factor through f as v o f at the point")
    return t


def transformed_residual_at(s: GQEStructure, pt: PhiTransform, x) -> SymTensor:
    """Ric + (1/phi'(f)) Hess_g(phi o f) - lambda g; vanishes iff the residual does."""
    t = _check_nu_matches(s, pt, x)
    m = s.metric
    u = potential_change_field(pt, s.f)
    dphi = pt.phiprime_of_t.value(t)
    ric = geometry.ricci_at(m, x)
    hess_u = geometry.hessian_g(m, u, x)
    g = geometry.metric_at(m, x)
    return ric + (1.0 / dphi) * hess_u - s.lam.value(x) * g


def traceless_identity_gap(s: GQEStructure, pt: PhiTransform, x) -> float:
    """g-norm of Ric0 + (1/phi'(f)) Hess0_g(phi o f); independent of lambda."""
    t = _check_nu_matches(s, pt, x)
    m = s.metric
    u = potential_change_field(pt, s.f)
    dphi = pt.phiprime_of_t.value(t)
    g = geometry.metric_at(m, x)
    ric0 = geometry.traceless(geometry.ricci_at(m, x), g)
    hess0 = geometry.traceless(geometry.hessian_g(m, u, x), g)
    gap = ric0 + (1.0 / dphi) * hess0
    return geometry.norm_tensor_g(m, gap, x)


def fit_lambda_by_trace(phi: ScalarFieldRn, f: ScalarFieldRn, nu: ScalarFieldRn, x) -> float:
    """lambda(x) = (S + lap_g f - nu ||grad f||_g^2) / n (trace of the equation)."""
    m = ConformalMetric(phi)
    v = m.phi_value(x)
    grad_f = f.jet(x).gradient
    s_val = geometry.scalar_curvature_at(m, x)
    lap_f = geometry.laplacian_g(m, f, x)
    norm2 = v * v * float(grad_f @ grad_f)
    return (s_val + lap_f - nu.value(x) * norm2) / phi.n
