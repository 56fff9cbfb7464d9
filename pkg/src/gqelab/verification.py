"""Grid construction, built-in structure presets, and check batteries.

Everything here is deterministic given a seed: grids have a fixed iteration
order and random directions come from a seeded generator, so reports built
from these batteries are reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import geometry, gqe, oracle
from .fields import RADIAL, ScalarFieldRn
from .gqe import GQEStructure, PhiTransform, fit_lambda_by_trace, phi_from_v
from .profiles import (Profile1D, compose, constant, inverse_profile,
                       parse_profile, scale_argument)
from .report import CheckResult, make_check

SKIP_EPS = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Sampling plan for a structure's evaluation grid."""

    family: str = "radial"
    count: int = 50
    lo: float = 0.01
    hi: float = 9.0
    rays: int = 8  # random directions (radial) or lateral offsets (translation)
    skip_eps: float = SKIP_EPS


def radial_grid(spec: GridSpec, n: int, rng: np.random.Generator) -> list[tuple[float, np.ndarray]]:
    """(r, x) samples: log-spaced r = ||x||^2 values times random directions."""
    rvals = np.logspace(math.log10(spec.lo), math.log10(spec.hi), spec.count)
    dirs = []
    for _ in range(spec.rays):
        d = rng.normal(size=n)
        dirs.append(d / np.linalg.norm(d))
    out = []
    for r in rvals:
        for d in dirs:
            out.append((float(r), math.sqrt(r) * d))
    return out


def translation_grid(spec: GridSpec, alpha: np.ndarray,
                     rng: np.random.Generator) -> list[tuple[float, np.ndarray]]:
    """(u, x) samples: u = alpha . x linspaced, crossed with lateral offsets."""
    a = float(alpha @ alpha)
    uvals = np.linspace(spec.lo, spec.hi, spec.count)
    offsets = [np.zeros(alpha.size)]
    for _ in range(spec.rays - 1):
        w = rng.normal(size=alpha.size)
        w -= (w @ alpha / a) * alpha
        offsets.append(rng.uniform(0.2, 1.5) * w)
    out = []
    for u in uvals:
        for w in offsets:
            out.append((float(u), (u / a) * alpha + w))
    return out


def structure_grid(bundle: "StructureBundle", rng: np.random.Generator,
                   ) -> tuple[list[tuple[float, np.ndarray]], int]:
    """Grid for the bundle, with near-degenerate points skipped and counted."""
    if bundle.grid.family == "radial":
        pts = radial_grid(bundle.grid, bundle.structure.n, rng)
    else:
        pts = translation_grid(bundle.grid, bundle.structure.phi.alpha, rng)
    kept = []
    skipped = 0
    for var, x in pts:
        if abs(bundle.structure.phi.value(x)) < bundle.grid.skip_eps:
            skipped += 1
        else:
            kept.append((var, x))
    return kept, skipped


@dataclass(frozen=True)
class StructureBundle:
    """A closure-assembled structure plus the profiles the checks consume."""

    name: str
    structure: GQEStructure
    s_profile: Profile1D
    nu_profile: Profile1D
    lam_profile: Profile1D
    grid: GridSpec
    v_profile: Profile1D | None = None  # nu as a function of the potential value
    var_name: str = "r"


def build_radial_bundle(name: str, phi: Profile1D, f: Profile1D, n: int,
                        grid: GridSpec, v_profile: Profile1D | None = None) -> StructureBundle:
    nu_p, lam_p, s_p = gqe.radial_closure(phi, f, n)
    structure = GQEStructure(n,
                             ScalarFieldRn.radial(phi, n),
                             ScalarFieldRn.radial(f, n),
                             ScalarFieldRn.radial(nu_p, n),
                             ScalarFieldRn.radial(lam_p, n))
    return StructureBundle(name, structure, s_p, nu_p, lam_p, grid,
                           v_profile=v_profile, var_name="r")


def build_translation_bundle(name: str, phi: Profile1D, f: Profile1D, alpha,
                             grid: GridSpec, v_profile: Profile1D | None = None) -> StructureBundle:
    alpha = np.asarray(alpha, dtype=float)
    nu_p, lam_p, s_p = gqe.translation_closure(phi, f, alpha)
    structure = GQEStructure(alpha.size,
                             ScalarFieldRn.translation(phi, alpha),
                             ScalarFieldRn.translation(f, alpha),
                             ScalarFieldRn.translation(nu_p, alpha),
                             ScalarFieldRn.translation(lam_p, alpha))
    return StructureBundle(name, structure, s_p, nu_p, lam_p, grid,
                           v_profile=v_profile, var_name="u")


def example_bundle(number: int, n: int, c: float = 1.0, alpha=None) -> StructureBundle:
    """The three worked examples (plus the flat Gaussian as example 0)."""
    if number == 1:
        if c == 0.0:
            raise ValueError("c must be nonzero")
        phi = parse_profile("exp(-r^2/2)", "r")
        f = parse_profile(f"{float(c)!r}*r", "r")
        b = build_radial_bundle(f"example1(n={n},c={c})", phi, f, n, GridSpec())
        return replace(b, v_profile=scale_argument(b.nu_profile, 1.0 / c, name="v"))
    if number == 2:
        if c == 0.0:
            raise ValueError("c must be nonzero")
        phi = parse_profile("1/(1+r)", "r", domain=(-1.0, math.inf))
        f = parse_profile(f"{float(c)!r}*r", "r")
        b = build_radial_bundle(f"example2(n={n},c={c})", phi, f, n, GridSpec())
        return replace(b, v_profile=scale_argument(b.nu_profile, 1.0 / c, name="v"))
    if number == 3:
        if alpha is None:
            alpha = np.eye(n)[0]
        phi = parse_profile("1+tanh(u)", "u")
        f = parse_profile("u", "u")
        grid = GridSpec(family="translation", lo=-3.0, hi=3.0)
        b = build_translation_bundle(f"example3(n={n})", phi, f, alpha, grid)
        # f is the identity, so nu is already a function of the potential value
        return replace(b, v_profile=b.nu_profile)
    if number == 0:
        phi = constant(1.0)
        f = parse_profile(f"{float(c)!r}*r", "r")
        b = build_radial_bundle(f"gaussian(n={n},c={c})", phi, f, n, GridSpec())
        return replace(b, v_profile=constant(0.0))
    raise ValueError(f"unknown example {number} (valid: 0..3)")


def catalog_bundles(n: int = 3) -> list[StructureBundle]:
    """Built-in verification catalog used by the invariants battery."""
    bundles = [
        example_bundle(0, n),
        example_bundle(1, n),
        example_bundle(2, n),
        example_bundle(3, n),
    ]
    # hyperbolic half-space as a translation pair (phi = u, f = u, nu = 2/u)
    alpha = np.zeros(n)
    alpha[-1] = 1.0
    phi = parse_profile("u", "u", domain=(0.0, math.inf))
    f = parse_profile("u", "u", domain=(0.0, math.inf))
    grid = GridSpec(family="translation", lo=0.2, hi=3.0)
    hyp = build_translation_bundle(f"hyperbolic(n={n})", phi, f, alpha, grid)
    bundles.append(replace(hyp, v_profile=hyp.nu_profile))
    # round-sphere chart as a radial pair with potential -h/n
    phi_s = parse_profile("(1+r)/2", "r", domain=(-1.0, math.inf))
    f_s = parse_profile(f"(1-r)/((r+1)*{float(n)!r})", "r", domain=(-1.0, math.inf))
    sph = build_radial_bundle(f"sphere_chart(n={n})", phi_s, f_s, n, GridSpec(hi=4.0))
    f_inv = inverse_profile(f_s, (0.005, 8.0))
    bundles.append(replace(sph, v_profile=compose(sph.nu_profile, f_inv, name="v")))
    # hyperbolic ball chart, finite extent in the chart variable
    phi_b = parse_profile("(1-r)/2", "r", domain=(-math.inf, 1.0))
    f_b = parse_profile("r", "r")
    ball = build_radial_bundle(f"hyperbolic_ball(n={n})", phi_b, f_b, n,
                               GridSpec(hi=0.9))
    bundles.append(replace(ball, v_profile=ball.nu_profile))
    return bundles


def residual_check(bundle: StructureBundle, rng: np.random.Generator,
                   tol: float = 1e-8) -> CheckResult:
    pts, skipped = structure_grid(bundle, rng)
    gaps = [gqe.residual_at(bundle.structure, x).max_abs() for _, x in pts]
    return make_check("defining_equation_residual", gaps, tol, points_skipped=skipped)


def wedge_check(bundle: StructureBundle, rng: np.random.Generator,
                tol: float = 1e-12) -> CheckResult:
    pts, skipped = structure_grid(bundle, rng)
    gaps = [gqe.wedge_invariant_at(bundle.structure, x) for _, x in pts]
    return make_check("wedge_invariant", gaps, tol, points_skipped=skipped)


def _mixed_rel(a: float, b: float) -> float:
    return abs(a - b) / (1.0 + abs(a) + abs(b))


def lambda_trace_check(bundle: StructureBundle, rng: np.random.Generator,
                       tol: float = 1e-9) -> CheckResult:
    """Closure lambda vs the trace-fitted lambda (structure inconsistency probe)."""
    pts, skipped = structure_grid(bundle, rng)
    s = bundle.structure
    gaps = []
    for _, x in pts:
        fitted = fit_lambda_by_trace(s.phi, s.f, s.nu, x)
        gaps.append(_mixed_rel(fitted, s.lam.value(x)))
    return make_check("lambda_trace_consistency", gaps, tol, points_skipped=skipped)


def scalar_profile_check(bundle: StructureBundle, rng: np.random.Generator,
                         tol: float = 1e-9) -> CheckResult:
    """Closure curvature profile vs the metric's scalar curvature."""
    pts, skipped = structure_grid(bundle, rng)
    m = bundle.structure.metric
    gaps = []
    for var, x in pts:
        gaps.append(_mixed_rel(geometry.scalar_curvature_at(m, x),
                               bundle.s_profile.value(var)))
    return make_check("scalar_curvature_profile", gaps, tol, points_skipped=skipped)


def transformed_checks(bundle: StructureBundle, rng: np.random.Generator,
                       tol: float = 1e-7, max_points: int = 25,
                       ) -> tuple[list[CheckResult], PhiTransform]:
    """Transformed-residual and traceless-gap checks when v = nu o f^{-1} is known."""
    if bundle.v_profile is None:
        raise ValueError(f"bundle {bundle.name} carries no v profile")
    pt = phi_from_v(bundle.v_profile, 1.0, 0.0, _transform_base(bundle))
    pts, skipped = structure_grid(bundle, rng)
    pts = pts[:: max(1, len(pts) // max_points)]
    res_gaps = []
    tl_gaps = []
    for _, x in pts:
        res_gaps.append(gqe.transformed_residual_at(bundle.structure, pt, x).max_abs())
        tl_gaps.append(gqe.traceless_identity_gap(bundle.structure, pt, x))
    return ([make_check("transformed_residual", res_gaps, tol, points_skipped=skipped),
             make_check("traceless_identity_gap", tl_gaps, tol, points_skipped=skipped)],
            pt)


def _transform_base(bundle: StructureBundle) -> float:
    """A base point inside the potential's value range for the quadrature."""
    s = bundle.structure
    if s.f.kind == RADIAL:
        lo, hi = bundle.grid.lo, bundle.grid.hi
        mid = math.sqrt(lo * hi)
    else:
        mid = 0.5 * (bundle.grid.lo + bundle.grid.hi)
    x = np.zeros(s.n)
    if s.f.kind == RADIAL:
        x[0] = math.sqrt(mid)
    else:
        x = (mid / s.phi.a) * s.phi.alpha
    return s.f.value(x)


ORACLE_METRICS = ("euclidean", "sphere", "half_space", "example1")


def oracle_metric(name: str, n: int) -> geometry.ConformalMetric:
    if name == "euclidean":
        return geometry.ConformalMetric(ScalarFieldRn.radial(constant(1.0), n))
    if name == "sphere":
        return geometry.ConformalMetric(
            ScalarFieldRn.radial(parse_profile("(1+r)/2", "r", domain=(-1.0, math.inf)), n))
    if name == "half_space":
        alpha = np.zeros(n)
        alpha[-1] = 1.0
        return geometry.ConformalMetric(
            ScalarFieldRn.translation(parse_profile("u", "u", domain=(0.0, math.inf)), alpha))
    if name == "example1":
        return geometry.ConformalMetric(
            ScalarFieldRn.radial(parse_profile("exp(-r^2/2)", "r"), n))
    raise ValueError(f"unknown oracle metric {name!r}")


def oracle_points(name: str, n: int, rng: np.random.Generator,
                  count: int = 20) -> list[np.ndarray]:
    """Sample regions sized so second-order FD truncation stays below 5e-6."""
    pts = []
    for _ in range(count):
        if name == "half_space":
            x = rng.uniform(-1.0, 1.0, size=n)
            x[-1] = rng.uniform(1.0, 2.0)
        elif name == "example1":
            x = rng.uniform(-0.45, 0.45, size=n)
        else:
            x = rng.uniform(-0.8, 0.8, size=n)
        pts.append(x)
    return pts


def oracle_agreement_gaps(name: str, n: int, rng: np.random.Generator,
                          count: int = 20, h1: float = 1e-4, h2: float = 5e-4,
                          ) -> tuple[list[float], list[float]]:
    """Relative Ricci and Christoffel gaps, closed form vs finite differences."""
    m = oracle_metric(name, n)
    raw = oracle.RawMetric(oracle.from_conformal(m).fn, n, h1_scale=h1, h2_scale=h2)
    ric_gaps = []
    chr_gaps = []
    for x in oracle_points(name, n, rng, count):
        closed_ric = geometry.ricci_at(m, x).mat
        closed_chr = geometry.christoffel_at(m, x)
        fd = oracle.fd_curvature(raw, x)
        ric_gaps.append(float(np.max(np.abs(closed_ric - fd.ricci)))
                        / (1.0 + float(np.max(np.abs(closed_ric)))))
        chr_gaps.append(float(np.max(np.abs(closed_chr - fd.christoffel)))
                        / (1.0 + float(np.max(np.abs(closed_chr)))))
    return ric_gaps, chr_gaps


def csv_rows(bundle: StructureBundle, rng: np.random.Generator,
             ) -> tuple[list[str], list[tuple]]:
    """Per-sample plot rows: variable, nu, lambda, S, max residual over rays."""
    pts, _ = structure_grid(bundle, rng)
    by_var: dict[float, float] = {}
    for var, x in pts:
        gap = gqe.residual_at(bundle.structure, x).max_abs()
        by_var[var] = max(by_var.get(var, 0.0), gap)
    header = [bundle.var_name, "nu", "lambda", "S", "residual_max"]
    rows = []
    for var in sorted(by_var):
        rows.append((var, bundle.nu_profile.value(var), bundle.lam_profile.value(var),
                     bundle.s_profile.value(var), by_var[var]))
    return header, rows
