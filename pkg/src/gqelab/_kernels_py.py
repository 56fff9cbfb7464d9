"""Pure NumPy implementations of the pointwise curvature assembly kernels.

These mirror gqelab._kernels_cy; the active backend is chosen in
gqelab.kernels. All kernels take the conformal factor jet (value phi,
coordinate gradient, coordinate Hessian) for the metric g = delta / phi^2.
"""

from __future__ import annotations

import numpy as np


def conformal_ricci(phi: float, gphi: np.ndarray, hphi: np.ndarray) -> np.ndarray:
    n = gphi.shape[0]
    lap = float(np.trace(hphi))
    grad2 = float(gphi @ gphi)
    diag = lap / phi - (n - 1.0) * grad2 / (phi * phi)
    ric = ((n - 2.0) / phi) * hphi
    ric = ric + diag * np.eye(n)
    return ric


def conformal_christoffel(phi: float, gphi: np.ndarray) -> np.ndarray:
    n = gphi.shape[0]
    gamma = np.zeros((n, n, n))
    eye = np.eye(n)
    # Gamma^k_ij = -(d_i phi * d_jk + d_j phi * d_ik - d_k phi * d_ij) / phi
    gamma -= np.einsum("i,jk->kij", gphi, eye)
    gamma -= np.einsum("j,ik->kij", gphi, eye)
    gamma += np.einsum("k,ij->kij", gphi, eye)
    return gamma / phi


def conformal_hessian(phi: float, gphi: np.ndarray,
                      gf: np.ndarray, hf: np.ndarray) -> np.ndarray:
    n = gphi.shape[0]
    cross = (np.outer(gf, gphi) + np.outer(gphi, gf)) / phi
    return hf + cross - (float(gf @ gphi) / phi) * np.eye(n)


def gqe_residual(phi: float, gphi: np.ndarray, hphi: np.ndarray,
                 gf: np.ndarray, hf: np.ndarray,
                 nu: float, lam: float) -> np.ndarray:
    n = gphi.shape[0]
    res = conformal_ricci(phi, gphi, hphi)
    res = res + conformal_hessian(phi, gphi, gf, hf)
    res = res - nu * np.outer(gf, gf)
    res = res - (lam / (phi * phi)) * np.eye(n)
    return res
