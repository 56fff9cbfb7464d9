"""Brute-force curvature from raw metric components by finite differences.

This module is the independent ground truth for the closed-form `geometry`
operators: it consumes only metric VALUES (never conformal-factor jets) and
assembles Christoffel symbols, the Riemann tensor, Ricci and the scalar
curvature from the standard coordinate formulas.

Step policy: first derivatives of the metric use h1 = 1e-4 * (1 + ||x||),
the outer derivatives of the Christoffel symbols use the looser
h2 = 5e-4 * (1 + ||x||) to balance truncation against cancellation (the
quartic-exponent catalog metric needs h2 at this size to hold 5e-6
agreement). Halving both steps should shrink disagreements with closed
forms about fourfold (second-order stencils).
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .geometry import ConformalMetric

_MIN_STEP = 1e-12


class NotPositiveDefiniteError(ValueError):
    """Metric components failed the positive-definiteness check."""


class CurvatureData(NamedTuple):
    christoffel: np.ndarray  # [k, i, j]
    riemann: np.ndarray      # [l, i, j, k] = R^l_ijk
    ricci: np.ndarray
    scalar: float


class RawMetric:
    """A metric given pointwise by its component matrix g_ij(x)."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], n: int,
                 h1_scale: float = 1e-4, h2_scale: float = 5e-4):
        self.fn = fn
        self.n = int(n)
        self.h1_scale = float(h1_scale)
        self.h2_scale = float(h2_scale)

    def components(self, x) -> np.ndarray:
        g = np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)
        if g.shape != (self.n, self.n):
            raise ValueError(f"metric components have shape {g.shape}, expected ({self.n}, {self.n})")
        return 0.5 * (g + g.T)

    def check_positive_definite(self, x) -> None:
        try:
            np.linalg.cholesky(self.components(x))
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError(f"metric not positive definite at {np.asarray(x)}") from exc


def from_conformal(metric: ConformalMetric) -> RawMetric:
    """Adapter exposing a conformal metric through values only."""

    def fn(x: np.ndarray) -> np.ndarray:
        v = metric.phi_value(x)
        return np.eye(metric.n) / (v * v)

    return RawMetric(fn, metric.n)


def _metric_derivatives(m: RawMetric, x: np.ndarray, h: float) -> np.ndarray:
    n = m.n
    dg = np.empty((n, n, n))
    for k in range(n):
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        dg[k] = (m.components(xp) - m.components(xm)) / (2.0 * h)
    return dg


def christoffel_fd(m: RawMetric, x) -> np.ndarray:
    """Gamma^k_ij from first metric derivatives, indexed [k, i, j]."""
    x = np.asarray(x, dtype=float)
    h = m.h1_scale * (1.0 + float(np.linalg.norm(x)))
    if h < _MIN_STEP:
        raise ValueError("finite-difference step underflow")
    g = m.components(x)
    ginv = np.linalg.inv(g)
    dg = _metric_derivatives(m, x, h)
    # Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    bracket = np.empty((m.n, m.n, m.n))
    for i in range(m.n):
        for j in range(m.n):
            for l in range(m.n):
                bracket[l, i, j] = dg[i, j, l] + dg[j, i, l] - dg[l, i, j]
    return 0.5 * np.einsum("kl,lij->kij", ginv, bracket)


def fd_curvature(m: RawMetric, x) -> CurvatureData:
    """Christoffel, Riemann, Ricci and scalar curvature at x.

    Convention: riemann[a, b, c, d] = R^a_bcd = d_c Gamma^a_db
    - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb,
    so Ric_bd = R^a_bad and S = g^{bd} Ric_bd.
    """
    x = np.asarray(x, dtype=float)
    m.check_positive_definite(x)
    n = m.n
    h2 = m.h2_scale * (1.0 + float(np.linalg.norm(x)))
    if h2 < _MIN_STEP:
        raise ValueError("finite-difference step underflow")
    gamma = christoffel_fd(m, x)
    dgamma = np.empty((n, n, n, n))  # [i, k, a, b] = d_i Gamma^k_ab
    for i in range(n):
        xp, xm = x.copy(), x.copy()
        xp[i] += h2
        xm[i] -= h2
        dgamma[i] = (christoffel_fd(m, xp) - christoffel_fd(m, xm)) / (2.0 * h2)
    riem = np.empty((n, n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    riem[a, b, c, d] = (
                        dgamma[c, a, d, b] - dgamma[d, a, c, b]
                        + float(gamma[a, c] @ gamma[:, d, b])
                        - float(gamma[a, d] @ gamma[:, c, b])
                    )
    ricci = np.empty((n, n))
    for b in range(n):
        for d in range(n):
            ricci[b, d] = sum(riem[a, b, a, d] for a in range(n))
    g = m.components(x)
    scalar = float(np.trace(np.linalg.solve(g, ricci)))
    return CurvatureData(gamma, riem, ricci, scalar)


def lower_riemann(m: RawMetric, x, riem: np.ndarray) -> np.ndarray:
    """Fully lowered components R_abcd = g_ae R^e_bcd."""
    g = m.components(np.asarray(x, dtype=float))
    return np.einsum("ae,ebcd->abcd", g, riem)
