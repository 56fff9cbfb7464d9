"""Closed-form differential geometry of the conformal metric g = delta / phi^2.

Every operator here is algebraic in the conformal factor's coordinate jet,
so results are exact up to rounding. The companion `oracle` module recomputes
curvature from raw metric components by finite differences and is kept fully
independent of this code path.

Index convention: tensors are stored with lower indices; raising an index on
the diagonal metric multiplies by phi^2, which is done explicitly where
needed. Derivatives of derived fields (e.g. the Ricci field when computing
divergences) use central differences with step 1e-4 * (1 + ||x||).
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import kernels
from .fields import ScalarFieldRn

_PHI_FLOOR = 1e-300
_DERIVED_STEP = 1e-4


class ZeroConformalFactorError(ArithmeticError):
    """The conformal factor vanished (|phi| <= 1e-300) at an evaluated point."""


class SymTensor:
    """Dense symmetric n x n tensor at a point; symmetrized on construction."""

    __slots__ = ("mat",)

    def __init__(self, mat):
        a = np.asarray(mat, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        self.mat = 0.5 * (a + a.T)

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.mat)))

    def __add__(self, other: "SymTensor") -> "SymTensor":
        return SymTensor(self.mat + other.mat)

    def __sub__(self, other: "SymTensor") -> "SymTensor":
        return SymTensor(self.mat - other.mat)

    def __mul__(self, scalar: float) -> "SymTensor":
        return SymTensor(self.mat * float(scalar))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"SymTensor({self.mat!r})"


class ConformalMetric:
    """The metric delta_ij / phi^2 on R^n for a non-vanishing scalar field phi."""

    __slots__ = ("phi", "n")

    def __init__(self, phi: ScalarFieldRn):
        self.phi = phi
        self.n = phi.n

    def phi_value(self, x) -> float:
        v = self.phi.value(x)
        if abs(v) <= _PHI_FLOOR:
            raise ZeroConformalFactorError(f"conformal factor vanished at {np.asarray(x)}")
        return v

    def phi_jet(self, x):
        jet = self.phi.jet(x)
        if abs(jet.value) <= _PHI_FLOOR:
            raise ZeroConformalFactorError(f"conformal factor vanished at {np.asarray(x)}")
        return jet


def _step(x: np.ndarray) -> float:
    return _DERIVED_STEP * (1.0 + float(np.linalg.norm(x)))


def metric_at(m: ConformalMetric, x) -> SymTensor:
    """g_ij = delta_ij / phi^2 at x."""
    v = m.phi_value(x)
    return SymTensor(np.eye(m.n) / (v * v))


def inverse_metric_at(m: ConformalMetric, x) -> SymTensor:
    v = m.phi_value(x)
    return SymTensor((v * v) * np.eye(m.n))


def christoffel_at(m: ConformalMetric, x) -> np.ndarray:
    """Christoffel symbols Gamma^k_ij, indexed [k, i, j]."""
    jet = m.phi_jet(x)
    return kernels.conformal_christoffel(jet.value, jet.gradient)


def ricci_at(m: ConformalMetric, x) -> SymTensor:
    """Ricci tensor of g at x, assembled from the phi jet."""
    jet = m.phi_jet(x)
    return SymTensor(kernels.conformal_ricci(jet.value, jet.gradient, jet.hessian))


def scalar_curvature_at(m: ConformalMetric, x) -> float:
    """S = (n-1) * (2 phi lap0 phi - n |grad0 phi|^2), flat operators on phi."""
    jet = m.phi_jet(x)
    lap0 = float(np.trace(jet.hessian))
    grad2 = float(jet.gradient @ jet.gradient)
    return (m.n - 1.0) * (2.0 * jet.value * lap0 - m.n * grad2)


def hessian_g(m: ConformalMetric, f: ScalarFieldRn, x) -> SymTensor:
    """Covariant Hessian of f with respect to g."""
    pj = m.phi_jet(x)
    fj = f.jet(x)
    return SymTensor(kernels.conformal_hessian(pj.value, pj.gradient, fj.gradient, fj.hessian))


def gradient_g(m: ConformalMetric, f: ScalarFieldRn, x) -> np.ndarray:
    """Raised gradient (grad f)^i = phi^2 d_i f."""
    v = m.phi_value(x)
    return (v * v) * f.jet(x).gradient


def laplacian_g(m: ConformalMetric, f: ScalarFieldRn, x) -> float:
    """g-trace of the covariant Hessian."""
    return trace_g(m, hessian_g(m, f, x), x)


def trace_g(m: ConformalMetric, T: SymTensor, x) -> float:
    v = m.phi_value(x)
    return (v * v) * float(np.trace(T.mat))


def inner_g(m: ConformalMetric, A: SymTensor, B: SymTensor, x) -> float:
    """Full metric contraction <A, B>_g for 2-tensors with lower indices."""
    v = m.phi_value(x)
    return (v**4) * float(np.sum(A.mat * B.mat))


def norm_tensor_g(m: ConformalMetric, T: SymTensor, x) -> float:
    return float(np.sqrt(max(inner_g(m, T, T, x), 0.0)))


def norm_covector_g(m: ConformalMetric, w: np.ndarray, x) -> float:
    v = m.phi_value(x)
    return abs(v) * float(np.linalg.norm(w))


def norm_vector_g(m: ConformalMetric, X: np.ndarray, x) -> float:
    v = m.phi_value(x)
    return float(np.linalg.norm(X)) / abs(v)


def divergence_g(m: ConformalMetric, X: Callable[[np.ndarray], np.ndarray], x,
                 step: float | None = None) -> float:
    """Divergence of a vector field given by contravariant components.

    div X = d_i X^i + Gamma^i_ik X^k; the coordinate derivative is a central
    difference of the supplied component function.
    """
    x = np.asarray(x, dtype=float)
    h = step if step is not None else _step(x)
    div = 0.0
    for i in range(m.n):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        div += (float(X(xp)[i]) - float(X(xm)[i])) / (2.0 * h)
    jet = m.phi_jet(x)
    # Gamma^i_ik = -n d_k phi / phi
    div -= m.n * float(jet.gradient @ np.asarray(X(x), dtype=float)) / jet.value
    return div


def divergence_tensor_g(m: ConformalMetric, T: Callable[[np.ndarray], np.ndarray], x,
                        step: float | None = None) -> np.ndarray:
    """Divergence (div T)_j = g^{ik} (d_i T_kj - Gamma^l_ik T_lj - Gamma^l_ij T_kl).

    T maps a point to the tensor's lower-index components; its coordinate
    derivative is taken by central differences.
    """
    x = np.asarray(x, dtype=float)
    h = step if step is not None else _step(x)
    n = m.n
    dT = np.empty((n, n, n))
    for i in range(n):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        dT[i] = (np.asarray(T(xp), dtype=float) - np.asarray(T(xm), dtype=float)) / (2.0 * h)
    gamma = christoffel_at(m, x)
    T0 = np.asarray(T(x), dtype=float)
    v = m.phi_value(x)
    cov = dT - np.einsum("lik,lj->ikj", gamma, T0) - np.einsum("lij,kl->ikj", gamma, T0)
    return (v * v) * np.einsum("iij->j", cov)


def traceless(T: SymTensor, g: SymTensor) -> SymTensor:
    """T minus its pure-trace part: T - (tr_g T / n) g, for positive definite g."""
    n = g.n
    try:
        ginv_t = np.linalg.solve(g.mat, T.mat)
    except np.linalg.LinAlgError as exc:
        raise ValueError("metric tensor is singular") from exc
    tr = float(np.trace(ginv_t))
    if not np.isfinite(tr):
        raise ValueError("metric tensor is singular")
    return SymTensor(T.mat - (tr / n) * g.mat)
