"""Quasi-Einstein structures on conformally flat R^n: construction and verification.

Convention used everywhere: radial data are functions of the SQUARED
Euclidean norm r = ||x||^2, and the metric is g = delta / phi^2 for a
non-vanishing conformal factor phi.
"""

from .expr import EvalError, ExprError, ParseError
from .fields import FieldJet, ScalarFieldRn, field_jet
from .geometry import (ConformalMetric, SymTensor, ZeroConformalFactorError,
                       christoffel_at, gradient_g, hessian_g, laplacian_g,
                       metric_at, ricci_at, scalar_curvature_at, traceless)
from .gqe import (GQEStructure, PhiTransform, fit_lambda_by_trace,
                  make_radial_structure, make_translation_structure, phi_from_v,
                  radial_closure, residual_at, traceless_identity_gap,
                  transformed_residual_at, translation_closure, wedge_invariant_at)
from .kernels import BACKEND as KERNEL_BACKEND
from .oracle import RawMetric, fd_curvature
from .profiles import DomainError, Profile1D, parse_profile
from .rigidity import (ModelSpace, divergence_identity_gap, karp_annulus,
                       model_space, ray_length, sphere_witness_verify)

__version__ = "0.1.0"

__all__ = [
    "ConformalMetric", "DomainError", "EvalError", "ExprError", "FieldJet",
    "GQEStructure", "KERNEL_BACKEND", "ModelSpace", "ParseError", "PhiTransform",
    "Profile1D", "RawMetric", "ScalarFieldRn", "SymTensor",
    "ZeroConformalFactorError", "christoffel_at", "divergence_identity_gap",
    "fd_curvature", "field_jet", "fit_lambda_by_trace", "gradient_g",
    "hessian_g", "karp_annulus", "laplacian_g", "make_radial_structure",
    "make_translation_structure", "metric_at", "model_space", "parse_profile",
    "phi_from_v", "radial_closure", "ray_length", "residual_at", "ricci_at",
    "scalar_curvature_at", "sphere_witness_verify", "traceless",
    "traceless_identity_gap", "transformed_residual_at", "translation_closure",
    "wedge_invariant_at",
]
