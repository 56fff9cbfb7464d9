"""Command-line surface: build structures, run verification suites, emit reports.

Subcommands: verify, example, curvature, invariants, sphere-witness, karp,
complete-check, models, parse-check. Exit codes: 0 all checks pass, 1 a
verification check failed, 2 usage or configuration error.

A config file (plain ``key = value`` lines, ``#`` comments) may supply any
long-option value; explicit flags override file values. Reports are JSON with
a fixed field order; repeated runs with identical config produce identical
bytes apart from the isolated ``generated_at`` timestamp.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from . import gqe, rigidity, verification
from .expr import ExprError, parse_expression, to_text
from .profiles import DomainError, parse_profile
from .report import VerificationReport, config_digest, make_check, write_csv

DEFAULT_TOLS = {
    "residual": 1e-8,
    "wedge": 1e-12,
    "lambda_trace": 1e-9,
    "scalar_profile": 1e-9,
    "transformed": 1e-7,
    "oracle": 5e-6,
    "model": 1e-6,
    "witness_residual": 1e-7,
    "witness_height": 1e-7,
    "witness_form": 1e-6,
    "divergence": 5e-5,
}


class ConfigError(ValueError):
    pass


def _load_config(path: str) -> dict[str, str]:
    cfg: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                cfg[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return cfg


def _pick(flag_value, cfg: dict[str, str], key: str, default, convert):
    if flag_value is not None:
        return flag_value
    if key in cfg:
        try:
            return convert(cfg[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config key {key}: {exc}") from exc
    return default


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


def _tolerances(args, cfg: dict[str, str]) -> dict[str, float]:
    tols = dict(DEFAULT_TOLS)
    for key, raw in cfg.items():
        if key.startswith("tol_"):
            name = key[4:]
            if name not in tols:
                raise ConfigError(f"unknown tolerance {name!r}")
            tols[name] = float(raw)
    for item in args.tol or []:
        if "=" not in item:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
        name, raw = item.split("=", 1)
        if name not in tols:
            raise ConfigError(f"unknown tolerance {name!r}")
        tols[name] = float(raw)
    for name, value in tols.items():
        if not value > 0.0:
            raise ConfigError(f"tolerance {name} must be positive")
    return tols


def _grid(args, cfg, family: str) -> verification.GridSpec:
    if family == "radial":
        lo = _pick(args.grid_lo, cfg, "grid_lo", 0.01, float)
        hi = _pick(args.grid_hi, cfg, "grid_hi", 9.0, float)
    else:
        lo = _pick(args.grid_lo, cfg, "grid_lo", -3.0, float)
        hi = _pick(args.grid_hi, cfg, "grid_hi", 3.0, float)
    count = _pick(args.grid_count, cfg, "grid_count", 50, int)
    rays = _pick(args.grid_rays, cfg, "grid_rays", 8, int)
    if count < 1 or rays < 1:
        raise ConfigError("grid must be non-empty")
    return verification.GridSpec(family=family, count=count, lo=lo, hi=hi, rays=rays)


def _emit(report: VerificationReport, args) -> int:
    text = report.render_json()
    if args.out_json:
        try:
            with open(args.out_json, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write report to {args.out_json}: {exc}") from exc
    else:
        sys.stdout.write(text)
    return 0 if report.overall_pass else 1


def _emit_csv(bundle, rng, args) -> None:
    if not args.out_csv:
        return
    header, rows = verification.csv_rows(bundle, rng)
    try:
        write_csv(args.out_csv, header, rows)
    except OSError as exc:
        raise ConfigError(f"cannot write CSV to {args.out_csv}: {exc}") from exc


def _family_battery(bundle, seed: int, tols: dict[str, float], with_transform: bool):
    checks = [
        verification.residual_check(bundle, np.random.default_rng(seed), tols["residual"]),
        verification.wedge_check(bundle, np.random.default_rng(seed), tols["wedge"]),
        verification.lambda_trace_check(bundle, np.random.default_rng(seed), tols["lambda_trace"]),
        verification.scalar_profile_check(bundle, np.random.default_rng(seed), tols["scalar_profile"]),
    ]
    if with_transform and bundle.v_profile is not None:
        extra, _ = verification.transformed_checks(
            bundle, np.random.default_rng(seed), tols["transformed"])
        checks.extend(extra)
    return checks


def _cmd_example(args, cfg) -> int:
    n = _pick(args.n, cfg, "n", 3, int)
    c = _pick(args.c, cfg, "c", 1.0, float)
    seed = _pick(args.seed, cfg, "seed", 0, int)
    alpha = _pick(args.alpha, cfg, "alpha", None, _floats)
    offset = _pick(args.lambda_offset, cfg, "lambda_offset", 0.0, float)
    tols = _tolerances(args, cfg)
    bundle = verification.example_bundle(args.number, n, c, alpha)
    bundle = replace(bundle, grid=_grid_or_default(args, cfg, bundle))
    if offset != 0.0:
        bundle = replace(bundle, structure=bundle.structure.with_lambda_offset(offset))
    config = {"subcommand": "example", "number": args.number, "n": n, "c": c,
              "alpha": alpha, "lambda_offset": offset, "seed": seed,
              "grid": (bundle.grid.family, bundle.grid.count, bundle.grid.lo,
                       bundle.grid.hi, bundle.grid.rays),
              **{f"tol_{k}": v for k, v in sorted(tols.items())}}
    checks = _family_battery(bundle, seed, tols, with_transform=False)
    _emit_csv(bundle, np.random.default_rng(seed), args)
    return _emit(VerificationReport(checks, config_digest(config), seed), args)


def _grid_or_default(args, cfg, bundle) -> verification.GridSpec:
    spec = _grid(args, cfg, bundle.grid.family)
    if args.grid_lo is None and "grid_lo" not in cfg:
        spec = replace(spec, lo=bundle.grid.lo)
    if args.grid_hi is None and "grid_hi" not in cfg:
        spec = replace(spec, hi=bundle.grid.hi)
    return spec


def _cmd_verify(args, cfg) -> int:
    n = _pick(args.n, cfg, "n", 3, int)
    seed = _pick(args.seed, cfg, "seed", 0, int)
    family = _pick(args.family, cfg, "family", "radial", str)
    if family not in ("radial", "translation"):
        raise ConfigError(f"family must be radial or translation, got {family!r}")
    phi_text = _pick(args.phi, cfg, "phi", None, str)
    f_text = _pick(args.f, cfg, "f", None, str)
    if not phi_text or not f_text:
        raise ConfigError("verify needs --phi and --f expressions")
    v_text = _pick(args.v, cfg, "v", None, str)
    c1 = _pick(args.c1, cfg, "c1", 1.0, float)
    c2 = _pick(args.c2, cfg, "c2", 0.0, float)
    t0 = _pick(args.t0, cfg, "t0", 0.0, float)
    tols = _tolerances(args, cfg)
    grid = _grid(args, cfg, family)
    var = "r" if family == "radial" else "u"
    lo_dom = _pick(args.domain_lo, cfg, "domain_lo", -math.inf, float)
    hi_dom = _pick(args.domain_hi, cfg, "domain_hi", math.inf, float)
    phi_p = parse_profile(phi_text, var, domain=(lo_dom, hi_dom))
    f_p = parse_profile(f_text, var, domain=(lo_dom, hi_dom))
    v_p = parse_profile(v_text, "t") if v_text else None
    if family == "radial":
        bundle = verification.build_radial_bundle("verify", phi_p, f_p, n, grid, v_p)
    else:
        alpha = _pick(args.alpha, cfg, "alpha", None, _floats)
        if alpha is None:
            alpha = tuple(1.0 if i == 0 else 0.0 for i in range(n))
        bundle = verification.build_translation_bundle("verify", phi_p, f_p, alpha, grid, v_p)
    config = {"subcommand": "verify", "family": family, "n": n, "phi": phi_text,
              "f": f_text, "v": v_text, "c1": c1, "c2": c2, "t0": t0, "seed": seed,
              "domain": (lo_dom, hi_dom),
              "grid": (grid.family, grid.count, grid.lo, grid.hi, grid.rays),
              **{f"tol_{k}": v for k, v in sorted(tols.items())}}
    checks = _family_battery(bundle, seed, tols, with_transform=v_text is not None)
    _emit_csv(bundle, np.random.default_rng(seed), args)
    return _emit(VerificationReport(checks, config_digest(config), seed), args)


def _cmd_curvature(args, cfg) -> int:
    n = _pick(args.n, cfg, "n", 3, int)
    seed = _pick(args.seed, cfg, "seed", 0, int)
    count = _pick(args.points, cfg, "points", 20, int)
    tols = _tolerances(args, cfg)
    names = verification.ORACLE_METRICS if args.metric == "all" else (args.metric,)
    checks = []
    for name in names:
        ric, chr_ = verification.oracle_agreement_gaps(
            name, n, np.random.default_rng(seed), count)
        checks.append(make_check(f"{name}_ricci_vs_oracle", ric, tols["oracle"]))
        checks.append(make_check(f"{name}_christoffel_vs_oracle", chr_, tols["oracle"]))
    config = {"subcommand": "curvature", "metric": args.metric, "n": n,
              "points": count, "seed": seed,
              **{f"tol_{k}": v for k, v in sorted(tols.items())}}
    return _emit(VerificationReport(checks, config_digest(config), seed), args)


def _cmd_invariants(args, cfg) -> int:
    n = _pick(args.n, cfg, "n", 3, int)
    seed = _pick(args.seed, cfg, "seed", 0, int)
    tols = _tolerances(args, cfg)
    checks = []
    for bundle in verification.catalog_bundles(n):
        for chk in _family_battery(bundle, seed, tols, with_transform=False):
            chk.name = f"{bundle.name}:{chk.name}"
            checks.append(chk)
    config = {"subcommand": "invariants", "n": n, "seed": seed,
              **{f"tol_{k}": v for k, v in sorted(tols.items())}}
    return _emit(VerificationReport(checks, config_digest(config), seed), args)


def _cmd_sphere_witness(args, cfg) -> int:
    n = _pick(args.n, cfg, "n", 3, int)
    seed = _pick(args.seed, cfg, "seed", 0, int)
    c = _pick(args.c, cfg, "c", 0.0, float)
    c1 = _pick(args.c1, cfg, "c1", 1.0, float)
    c2 = _pick(args.c2, cfg, "c2", 0.0, float)
    t0 = _pick(args.t0, cfg, "t0", 0.0, float)
    v_text = _pick(args.v, cfg, "v", "0", str)
    tols = _tolerances(args, cfg)
    v_p = parse_profile(v_text, "t")
    report = rigidity.sphere_witness_verify(
        n, v_p, c, c1=c1, c2=c2, t0=t0, seed=seed,
        tol_residual=tols["witness_residual"], tol_height=tols["witness_height"],
        tol_hessian_form=tols["witness_form"])
    config = {"subcommand": "sphere_witness", "n": n, "v": v_text, "c": c,
              "c1": c1, "c2": c2, "t0": t0, "seed": seed,
              **{f"tol_{k}": v for k, v in sorted(tols.items())}}
    report.config_hash = config_digest(config)
    return _emit(report, args)


def _cmd_karp(args, cfg) -> int:
    n = _pick(args.n, cfg, "n", 3, int)
    seed = _pick(args.seed, cfg, "seed", 0, int)
    c = _pick(args.c, cfg, "c", 1.0, float)
    radii = _pick(args.rg, cfg, "rg", (0.5, 1.0, 2.0), _floats)
    number = _pick(args.example, cfg, "example", 1, int)
    bundle = verification.example_bundle(number, n, c)
    if bundle.structure.phi.kind != "radial":
        raise ConfigError("annulus flux needs a radial example (0, 1 or 2)")
    pt = gqe.phi_from_v(bundle.v_profile, 1.0, 0.0,
                        verification._transform_base(bundle))
    extras = {}
    for rg in radii:
        extras[f"karp_rg_{rg:g}"] = rigidity.karp_annulus(bundle.structure, pt, rg)
    config = {"subcommand": "karp", "example": number, "n": n, "c": c,
              "rg": tuple(radii), "seed": seed}
    # the hypothesis is asymptotic: values are reported, never asserted
    return _emit(VerificationReport([], config_digest(config), seed, extras=extras), args)


def _cmd_complete_check(args, cfg) -> int:
    n = _pick(args.n, cfg, "n", 3, int)
    seed = _pick(args.seed, cfg, "seed", 0, int)
    c = _pick(args.c, cfg, "c", 1.0, float)
    lengths = _pick(args.T, cfg, "T", (1.0, 10.0, 100.0), _floats)
    number = _pick(args.example, cfg, "example", 1, int)
    sup_phi = _pick(args.sup_phi, cfg, "sup_phi", None, float)
    bundle = verification.example_bundle(number, n, c)
    s = bundle.structure
    direction = np.zeros(n)
    if s.phi.kind == "radial":
        direction[0] = 1.0
    else:
        direction = s.phi.alpha / math.sqrt(s.phi.a)
    if sup_phi is None:
        scan = np.linspace(0.0, max(lengths), 2001)
        sup_phi = max(abs(s.phi.value(float(t) * direction)) for t in scan)
    checks = []
    extras = {"sup_phi": sup_phi}
    for T in lengths:
        length = rigidity.ray_length(s, direction, T)
        extras[f"ray_length_T_{T:g}"] = length
        bound = T / sup_phi
        gap = 0.0 if length >= bound else bound - length
        checks.append(make_check(f"growth_T_{T:g}", [gap], 1e-9))
    config = {"subcommand": "complete_check", "example": number, "n": n, "c": c,
              "T": tuple(lengths), "sup_phi": sup_phi, "seed": seed}
    return _emit(VerificationReport(checks, config_digest(config), seed, extras=extras), args)


def _cmd_models(args, cfg) -> int:
    n = _pick(args.n, cfg, "n", 3, int)
    seed = _pick(args.seed, cfg, "seed", 0, int)
    rho = _pick(args.rho, cfg, "rho", 1.0, float)
    k = _pick(args.k, cfg, "k", 1.0, float)
    tols = _tolerances(args, cfg)
    kinds = ("euclidean", "hyperbolic", "warped") if args.kind == "all" else (args.kind,)
    checks = []
    for kind in kinds:
        param = {"euclidean": None, "hyperbolic": rho, "warped": k}[kind]
        ms = rigidity.model_space(kind, param, n)
        pts = rigidity.model_sample_points(kind, n, seed=seed)
        checks.append(make_check(f"{kind}_scalar_curvature",
                                 rigidity.model_scalar_gaps(ms, pts), tols["model"]))
    config = {"subcommand": "models", "kind": args.kind, "n": n, "rho": rho,
              "k": k, "seed": seed,
              **{f"tol_{k2}": v for k2, v in sorted(tols.items())}}
    return _emit(VerificationReport(checks, config_digest(config), seed), args)


def _cmd_parse_check(args, cfg) -> int:
    seed = _pick(args.seed, cfg, "seed", 0, int)
    var = args.var
    tree = parse_expression(args.expression, var)
    canonical = to_text(tree)
    roundtrip = parse_expression(canonical, var)
    gap = 0.0 if roundtrip == tree else 1.0
    print(canonical)
    config = {"subcommand": "parse_check", "expression": args.expression,
              "var": var, "seed": seed}
    report = VerificationReport([make_check("parse_roundtrip", [gap], 1e-15)],
                                config_digest(config), seed)
    return _emit(report, args)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override file values")
    p.add_argument("--out-json", help="write the JSON report here (default: stdout)")
    p.add_argument("--out-csv", help="write plot-data CSV here")
    p.add_argument("--seed", type=int, help="seed for grid directions (default 0)")
    p.add_argument("--n", type=int, help="dimension, at least 3 (default 3)")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE",
                   help="override a named tolerance (repeatable)")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-lo", type=float, help="lowest sampled r or u")
    p.add_argument("--grid-hi", type=float, help="highest sampled r or u")
    p.add_argument("--grid-count", type=int, help="samples of the symmetry variable")
    p.add_argument("--grid-rays", type=int, help="directions / lateral offsets")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gqelab",
        description="Construct and verify quasi-Einstein structures on conformally flat R^n "
                    "(radial profiles are functions of the SQUARED norm r = ||x||^2)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("example", help="verify a built-in worked example")
    p.add_argument("number", type=int, choices=(0, 1, 2, 3),
                   help="0 = flat Gaussian, 1..3 = worked examples")
    p.add_argument("--c", type=float, help="potential slope constant (default 1)")
    p.add_argument("--alpha", type=_floats, help="translation direction, comma separated")
    p.add_argument("--lambda-offset", type=float,
                   help="shift lambda to exercise failure reporting")
    _add_common(p)
    _add_grid(p)
    p.set_defaults(handler=_cmd_example)

    p = sub.add_parser("verify", help="verify a structure built from expressions")
    p.add_argument("--family", choices=("radial", "translation"))
    p.add_argument("--phi", help="conformal factor profile expression")
    p.add_argument("--f", help="potential profile expression")
    p.add_argument("--v", help="nu as a function of the potential value (enables "
                                "transformed-equation checks)")
    p.add_argument("--alpha", type=_floats, help="translation direction, comma separated")
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--t0", type=float)
    p.add_argument("--domain-lo", type=float, help="profile domain lower bound")
    p.add_argument("--domain-hi", type=float, help="profile domain upper bound")
    _add_common(p)
    _add_grid(p)
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("curvature", help="closed forms vs the finite-difference oracle")
    p.add_argument("--metric", default="all",
                   choices=("all",) + verification.ORACLE_METRICS)
    p.add_argument("--points", type=int, help="random points per metric (default 20)")
    _add_common(p)
    p.set_defaults(handler=_cmd_curvature)

    p = sub.add_parser("invariants", help="run the battery over the built-in catalog")
    _add_common(p)
    p.set_defaults(handler=_cmd_invariants)

    p = sub.add_parser("sphere-witness", help="round-sphere potential witness")
    p.add_argument("--v", help="profile v(t) for nu = v o f (default 0)")
    p.add_argument("--c", type=float, help="additive constant in the potential")
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--t0", type=float)
    _add_common(p)
    p.set_defaults(handler=_cmd_sphere_witness)

    p = sub.add_parser("karp", help="annulus flux values for a radial example")
    p.add_argument("--example", type=int, choices=(0, 1, 2))
    p.add_argument("--c", type=float)
    p.add_argument("--rg", type=_floats, help="geodesic radii, comma separated (default 0.5,1,2)")
    _add_common(p)
    p.set_defaults(handler=_cmd_karp)

    p = sub.add_parser("complete-check", help="ray-length growth for an example")
    p.add_argument("--example", type=int, choices=(0, 1, 2, 3))
    p.add_argument("--c", type=float)
    p.add_argument("--T", type=_floats, help="ray parameter values, comma separated")
    p.add_argument("--sup-phi", type=float, help="override the estimated sup |phi|")
    _add_common(p)
    p.set_defaults(handler=_cmd_complete_check)

    p = sub.add_parser("models", help="constant-curvature model catalog")
    p.add_argument("--kind", default="all",
                   choices=("all", "euclidean", "hyperbolic", "warped"))
    p.add_argument("--rho", type=float, help="hyperbolic curvature radius")
    p.add_argument("--k", type=float, help="warping exponent")
    _add_common(p)
    p.set_defaults(handler=_cmd_models)

    p = sub.add_parser("parse-check", help="parse an expression and echo its canonical form")
    p.add_argument("expression")
    p.add_argument("--var", default="r", help="free variable name (default r)")
    _add_common(p)
    p.set_defaults(handler=_cmd_parse_check)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        cfg = _load_config(args.config) if args.config else {}
        return args.handler(args, cfg)
    except (ExprError, DomainError, ConfigError, ValueError, OSError,
            rigidity.ChartExhaustedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
