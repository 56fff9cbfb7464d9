"""Desk-scale numerical witnesses of the rigidity phenomena.

This module exercises, on explicit charts, the identities that drive the
classification of quasi-Einstein structures with nu factoring through the
potential: the divergence identity for the traceless-Ricci flux of the
changed potential, the round-sphere potential in a stereographic chart, the
constant-curvature model catalog, the annulus flux quantity used for the
noncompact no-boundary-term hypothesis, and ray-length growth (completeness
heuristic for bounded conformal factors).

Stereographic convention: the chart pole is the point at infinity, the
height function along the pole direction is h(x) = (r - 1) / (r + 1) with
r = ||x||^2, and the chart factor is phi(r) = (1 + r) / 2 (unit sphere,
scalar curvature n(n-1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .fields import RADIAL, ScalarFieldRn
from .gqe import (GQEStructure, PhiTransform, fit_lambda_by_trace,
                  potential_change_field, residual_at)
from .geometry import ConformalMetric
from .numerics import adaptive_simpson
from .profiles import Profile1D, compose, parse_profile
from .report import VerificationReport, config_digest, make_check


class ChartExhaustedError(RuntimeError):
    """The chart's geodesic extent ends before the requested radius."""


class PhiZeroCrossingError(ArithmeticError):
    """The conformal factor changes sign along the integration segment."""


class InvertibilityError(ValueError):
    """The requested values fall outside the transform's reachable range."""


def divergence_identity_gap(s: GQEStructure, pt: PhiTransform, x,
                            step: float | None = None) -> tuple[float, float]:
    """Two gaps for the traceless-Ricci flux of u = phi o f at x.

    general_gap: |div(Ric0(grad u)) - (n-2)/(2n) <dS, du>_g - <Ric, Hess0 u>_g|,
    an identity for ANY metric and potential (Bianchi plus product rule).

    constantS_gap: |div(Ric0(grad u)) + (1/phi'(f)) ||Hess0 u||_g^2|, valid when
    the structure solves the defining equation and S is constant. Both use a
    finite-differenced Ricci field, so tolerances sit near 5e-5.
    """
    x = np.asarray(x, dtype=float)
    m = s.metric
    n = s.n
    u = potential_change_field(pt, s.f)

    def flux(y: np.ndarray) -> np.ndarray:
        v = m.phi_value(y)
        g = geometry.metric_at(m, y)
        ric0 = geometry.traceless(geometry.ricci_at(m, y), g)
        du = u.jet(y).gradient
        # contravariant components: X^i = phi^4 Ric0_ij d_j u
        return (v**4) * (ric0.mat @ du)

    div_flux = geometry.divergence_g(m, flux, x, step=step)

    v = m.phi_value(x)
    h = step if step is not None else 1e-4 * (1.0 + float(np.linalg.norm(x)))
    grad_s = np.empty(n)
    for i in range(n):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        grad_s[i] = (geometry.scalar_curvature_at(m, xp)
                     - geometry.scalar_curvature_at(m, xm)) / (2.0 * h)
    du = u.jet(x).gradient
    ds_du = (v * v) * float(grad_s @ du)

    g = geometry.metric_at(m, x)
    ric = geometry.ricci_at(m, x)
    hess0 = geometry.traceless(geometry.hessian_g(m, u, x), g)
    ric_hess0 = geometry.inner_g(m, ric, hess0, x)

    general_gap = abs(div_flux - (n - 2.0) / (2.0 * n) * ds_du - ric_hess0)

    dphi = pt.phiprime_of_t.value(s.f.value(x))
    hess0_norm2 = geometry.inner_g(m, hess0, hess0, x)
    constant_s_gap = abs(div_flux + hess0_norm2 / dphi)
    return general_gap, constant_s_gap


def sphere_chart_profile() -> Profile1D:
    return parse_profile("(1+t)/2", "t", domain=(-1.0, math.inf))


def height_profile() -> Profile1D:
    return parse_profile("(t-1)/(t+1)", "t", domain=(-1.0, math.inf))


def default_sphere_samples(n: int, seed: int = 0, count: int = 25) -> list[np.ndarray]:
    """Deterministic chart points with |x| in [0.2, 1.8]."""
    rng = np.random.default_rng(seed)
    radii = np.linspace(0.2, 1.8, max(1, count // 5))
    points = []
    for rad in radii:
        for _ in range(5):
            d = rng.normal(size=n)
            d /= np.linalg.norm(d)
            points.append(rad * d)
    return points[:count]


@dataclass(frozen=True)
class SphereWitness:
    """Assembled round-sphere witness: chart, transform and derived potential."""

    n: int
    c: float
    transform: PhiTransform
    structure: GQEStructure
    height: ScalarFieldRn
    bracket: tuple[float, float]


def _expand_bracket(pt: PhiTransform, lo_y: float, hi_y: float) -> tuple[float, float]:
    """Grow a t-bracket around t0 until phi covers [lo_y, hi_y]."""
    increasing = pt.c1 > 0
    width = 1.0
    for _ in range(60):
        tlo, thi = pt.t0 - width, pt.t0 + width
        try:
            ylo, yhi = pt.phi_of_t.value(tlo), pt.phi_of_t.value(thi)
        except Exception:
            width *= 0.5
            continue
        if not increasing:
            ylo, yhi = yhi, ylo
        if ylo < lo_y and yhi > hi_y:
            return (pt.t0 - width, pt.t0 + width)
        width *= 2.0
    raise InvertibilityError(
        f"range [{lo_y}, {hi_y}] not reachable by the transform (invertibility failure)")


def sphere_witness_potential(pt: PhiTransform, c: float, n: int,
                             bracket: tuple[float, float]) -> Profile1D:
    """Radial profile f(r) = phi^{-1}(c - h(r)/n) with implicit-derivative jets."""
    h = height_profile()

    def q_jet(r: float):
        hv, h1, h2 = h.jet(r)
        return c - hv / n, -h1 / n, -h2 / n

    def value(r: float) -> float:
        qv, _, _ = q_jet(r)
        return pt.invert(qv, bracket)

    def d1(r: float) -> float:
        qv, q1, _ = q_jet(r)
        t = pt.invert(qv, bracket)
        return q1 / pt.phiprime_of_t.value(t)

    def d2(r: float) -> float:
        qv, q1, q2 = q_jet(r)
        t = pt.invert(qv, bracket)
        dphi = pt.phiprime_of_t.value(t)
        f1 = q1 / dphi
        ddphi = -pt.v.value(t) * dphi
        return (q2 - ddphi * f1 * f1) / dphi

    return Profile1D(value, d1, d2, domain=h.domain, name="f = phi^-1(c - h/n)")


def build_sphere_witness(n: int, v: Profile1D, c: float,
                         sample_points: list[np.ndarray],
                         c1: float = 1.0, c2: float = 0.0, t0: float = 0.0) -> SphereWitness:
    from .gqe import phi_from_v  # local import keeps module load order simple

    pt = phi_from_v(v, c1, c2, t0)
    h = height_profile()
    q_values = [c - h.value(float(np.asarray(x) @ np.asarray(x))) / n for x in sample_points]
    margin = 1e-6 + 1e-3 * (max(q_values) - min(q_values))
    bracket = _expand_bracket(pt, min(q_values) - margin, max(q_values) + margin)

    f_profile = sphere_witness_potential(pt, c, n, bracket)
    phi_field = ScalarFieldRn.radial(sphere_chart_profile(), n)
    f_field = ScalarFieldRn.radial(f_profile, n)
    nu_field = ScalarFieldRn.radial(compose(v, f_profile, name="nu = v o f"), n)
    lam_field = ScalarFieldRn.explicit(
        lambda x: fit_lambda_by_trace(phi_field, f_field, nu_field, x), n)
    structure = GQEStructure(n, phi_field, f_field, nu_field, lam_field)
    height_field = ScalarFieldRn.radial(h, n)
    return SphereWitness(n, float(c), pt, structure, height_field, bracket)


def sphere_witness_verify(n: int, v: Profile1D, c: float,
                          sample_points: list[np.ndarray] | None = None,
                          c1: float = 1.0, c2: float = 0.0, t0: float = 0.0,
                          tol_residual: float = 1e-7,
                          tol_height: float = 1e-7,
                          tol_hessian_form: float = 1e-6,
                          tol_scalar: float = 1e-6,
                          seed: int = 0) -> VerificationReport:
    """Run the round-sphere witness checks and report per-check gaps.

    Checks: (a) residual of the defining equation with nu = v o f and a
    trace-fitted lambda; (b) the height identity Hess_g h + h g = 0 behind
    the chart; (c) the conformal-gradient Hessian form Hess_g u =
    (-S u / (n (n-1)) + c~) g with the constant c~ fitted by least squares
    over the sample diagonal; plus the chart's scalar curvature pin.
    """
    if sample_points is None:
        sample_points = default_sphere_samples(n, seed=seed)
    witness = build_sphere_witness(n, v, c, sample_points, c1=c1, c2=c2, t0=t0)
    s = witness.structure
    m = s.metric
    u = potential_change_field(witness.transform, s.f)

    residual_gaps = [residual_at(s, x).max_abs() for x in sample_points]

    height_gaps = []
    scalar_gaps = []
    expected_s = n * (n - 1.0)
    for x in sample_points:
        g = geometry.metric_at(m, x)
        hess_h = geometry.hessian_g(m, witness.height, x)
        ident = hess_h + witness.height.value(x) * g
        height_gaps.append(geometry.norm_tensor_g(m, ident, x))
        scalar_gaps.append(abs(geometry.scalar_curvature_at(m, x) - expected_s))

    # least-squares fit of the additive constant in the Hessian form
    num = 0.0
    den = 0.0
    cached = []
    for x in sample_points:
        g = geometry.metric_at(m, x)
        hess_u = geometry.hessian_g(m, u, x)
        s_val = geometry.scalar_curvature_at(m, x)
        d = hess_u.mat + (s_val * u.value(x) / (n * (n - 1.0))) * g.mat
        num += float(np.sum(np.diag(d) * np.diag(g.mat)))
        den += float(np.sum(np.diag(g.mat) ** 2))
        cached.append((x, g, hess_u, s_val))
    c_tilde = num / den
    form_gaps = []
    for x, g, hess_u, s_val in cached:
        target = (-s_val * u.value(x) / (n * (n - 1.0)) + c_tilde) * g.mat
        form_gaps.append(geometry.norm_tensor_g(m, geometry.SymTensor(hess_u.mat - target), x))

    lam_values = [s.lam.value(x) for x in sample_points]

    checks = [
        make_check("witness_residual", residual_gaps, tol_residual),
        make_check("height_identity", height_gaps, tol_height),
        make_check("sphere_scalar_curvature", scalar_gaps, tol_scalar),
        make_check("hessian_form_deviation", form_gaps, tol_hessian_form),
    ]
    cfg = {"n": n, "v": v.name, "c": c, "c1": c1, "c2": c2, "t0": t0,
           "samples": len(sample_points), "seed": seed}
    return VerificationReport(checks, config_digest(cfg), seed, extras={
        "c_tilde": c_tilde,
        "lambda_min": min(lam_values),
        "lambda_max": max(lam_values),
    })


@dataclass(frozen=True)
class ModelSpace:
    """A constant-curvature comparison chart with its expected scalar curvature."""

    kind: str
    chart: ConformalMetric
    expected_scalar: float


def model_space(kind: str, param: float | None, n: int) -> ModelSpace:
    """Charts for the constant-curvature model catalog.

    kinds: 'euclidean' (also the flat Riemannian-product witness),
    'hyperbolic' (half-space of curvature radius rho > 0), and 'warped'
    (warped product over a flat fiber with exponent k != 0, re-charted onto
    the half-space by s = e^{-kt}/k, which gives the factor phi(u) = k u).
    """
    if kind == "euclidean":
        phi = ScalarFieldRn.radial(parse_profile("1", "t"), n)
        return ModelSpace(kind, ConformalMetric(phi), 0.0)
    if kind == "hyperbolic":
        rho = 1.0 if param is None else float(param)
        if rho <= 0.0:
            raise ValueError(f"hyperbolic radius must be positive, got {rho}")
        prof = parse_profile(f"t/{rho!r}", "t", domain=(0.0, math.inf))
        alpha = np.zeros(n)
        alpha[-1] = 1.0
        phi = ScalarFieldRn.translation(prof, alpha)
        return ModelSpace(kind, ConformalMetric(phi), -n * (n - 1.0) / (rho * rho))
    if kind == "warped":
        k = 1.0 if param is None else float(param)
        if k == 0.0:
            raise ValueError("warping exponent must be nonzero")
        prof = parse_profile(f"{k!r}*t", "t", domain=(0.0, math.inf))
        alpha = np.zeros(n)
        alpha[-1] = 1.0
        phi = ScalarFieldRn.translation(prof, alpha)
        return ModelSpace(kind, ConformalMetric(phi), -n * (n - 1.0) * k * k)
    raise ValueError(f"unknown model kind {kind!r}")


def model_sample_points(kind: str, n: int, seed: int = 0, count: int = 20) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(count):
        x = rng.uniform(-1.5, 1.5, size=n)
        if kind in ("hyperbolic", "warped"):
            x[-1] = rng.uniform(0.3, 2.5)
        points.append(x)
    return points


def model_scalar_gaps(ms: ModelSpace, points: list[np.ndarray]) -> list[float]:
    return [abs(geometry.scalar_curvature_at(ms.chart, x) - ms.expected_scalar)
            for x in points]


def unit_sphere_area(n: int) -> float:
    """Surface measure of S^{n-1}: 2 pi^{n/2} / Gamma(n/2)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


_RADIUS_CAP = 1e6


def geodesic_distance(s: GQEStructure, rho: float, tol: float = 1e-10) -> float:
    """Geodesic distance from the origin along a ray: integral of 1/|phi| in [0, rho]."""
    p = s.phi.profile
    return adaptive_simpson(lambda t: 1.0 / abs(p.value(t * t)), 0.0, rho, tol=tol)


def _euclidean_radius_for(s: GQEStructure, target: float, tol: float = 1e-11) -> float:
    """Invert the geodesic distance; distances accumulate incrementally so the
    peak of 1/|phi| near the origin (or a chart boundary) is resolved once."""
    p = s.phi.profile

    def integrand(t: float) -> float:
        return 1.0 / abs(p.value(t * t))

    hi_dom = p.domain[1]
    rho_max = math.sqrt(hi_dom) if math.isfinite(hi_dom) and hi_dom > 0 else math.inf
    finite = math.isfinite(rho_max)
    lo, dist_lo = 0.0, 0.0
    ub = 0.5 * rho_max if finite else 1.0
    while True:
        dist_ub = dist_lo + adaptive_simpson(integrand, lo, ub, tol)
        if dist_ub >= target:
            break
        lo, dist_lo = ub, dist_ub
        if finite:
            gap = rho_max - ub
            if gap <= 1e-7 * rho_max:
                raise ChartExhaustedError(
                    f"chart ends near geodesic radius {dist_ub:.6g} < requested {target:.6g}")
            ub = rho_max - 0.5 * gap  # creep toward the chart boundary
        else:
            if ub > _RADIUS_CAP:
                raise ChartExhaustedError(
                    f"geodesic radius {target:.6g} not reached within the sampling cap")
            ub *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + ub)
        dist_mid = dist_lo + adaptive_simpson(integrand, lo, mid, tol)
        if dist_mid >= target:
            ub = mid
        else:
            lo, dist_lo = mid, dist_mid
        if ub - lo <= 1e-12 * (1.0 + abs(mid)):
            break
    return 0.5 * (lo + ub)


def karp_annulus(s: GQEStructure, pt: PhiTransform, r_g: float,
                 tol: float = 1e-8) -> float:
    """Annulus flux (1/r) * integral over B(2r)\\B(r) of ||Ric0(grad u)|| dvol.

    Radial structures only: geodesic balls about the origin are Euclidean
    balls, the geodesic radius is inverted by bisection, and the volume
    integral reduces to a 1-D quadrature against phi^{-n} t^{n-1}.
    """
    if s.phi.kind != RADIAL or s.f.kind != RADIAL:
        raise ValueError("annulus flux is implemented for radial structures only")
    if r_g <= 0.0:
        raise ValueError("geodesic radius must be positive")
    n = s.n
    m = s.metric
    u = potential_change_field(pt, s.f)
    rho1 = _euclidean_radius_for(s, r_g)
    rho2 = _euclidean_radius_for(s, 2.0 * r_g)

    def integrand(t: float) -> float:
        x = np.zeros(n)
        x[0] = t
        v = m.phi_value(x)
        g = geometry.metric_at(m, x)
        ric0 = geometry.traceless(geometry.ricci_at(m, x), g)
        du = u.jet(x).gradient
        omega = (v * v) * (ric0.mat @ du)  # covector Ric0_ij (grad u)^j
        norm = abs(v) * float(np.linalg.norm(omega))
        return norm * abs(v) ** (-n) * t ** (n - 1)

    integral = adaptive_simpson(integrand, rho1, rho2, tol=tol)
    return unit_sphere_area(n) * integral / r_g


def ray_length(s: GQEStructure, direction, T: float, x0=None,
               tol: float = 1e-10, scan: int = 513) -> float:
    """g-length of the Euclidean ray segment x0 + t*direction, t in [0, T].

    The integrand is 1/|phi|. A sign change of phi along the segment is an
    error; an underflow of a decaying positive phi yields an infinite length
    (the segment is already metrically unbounded).
    """
    x0 = np.zeros(s.n) if x0 is None else np.asarray(x0, dtype=float)
    direction = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        raise ValueError("direction must be nonzero")
    direction = direction / norm
    if T < 0.0:
        raise ValueError("T must be nonnegative")
    if T == 0.0:
        return 0.0

    def phi_on_ray(t: float) -> float:
        return s.phi.value(x0 + t * direction)

    sign = 0.0
    underflow = False
    for t in np.linspace(0.0, T, scan):
        v = phi_on_ray(float(t))
        if v == 0.0:
            underflow = True
            continue
        this = math.copysign(1.0, v)
        if sign == 0.0:
            sign = this
        elif this != sign:
            raise PhiZeroCrossingError(f"conformal factor changes sign near t = {t}")
    if underflow:
        return math.inf
    return adaptive_simpson(lambda t: 1.0 / abs(phi_on_ray(t)), 0.0, T, tol=tol)
