"""Backend parity: the compiled kernels must match the NumPy fallback."""

from __future__ import annotations

import numpy as np
import pytest

from gqelab import _kernels_py
from gqelab import kernels

cy = pytest.importorskip("gqelab._kernels_cy")


def _random_inputs(n, rng):
    phi = 0.5 + rng.random()
    gphi = np.ascontiguousarray(rng.normal(size=n))
    hphi = rng.normal(size=(n, n))
    hphi = np.ascontiguousarray(0.5 * (hphi + hphi.T))
    gf = np.ascontiguousarray(rng.normal(size=n))
    hf = rng.normal(size=(n, n))
    hf = np.ascontiguousarray(0.5 * (hf + hf.T))
    return phi, gphi, hphi, gf, hf


@pytest.mark.parametrize("n", [3, 4, 5, 8])
def test_backends_agree(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        phi, gphi, hphi, gf, hf = _random_inputs(n, rng)
        nu, lam = rng.normal(), rng.normal()
        assert np.allclose(_kernels_py.conformal_ricci(phi, gphi, hphi),
                           cy.conformal_ricci(phi, gphi, hphi), atol=1e-13)
        assert np.allclose(_kernels_py.conformal_christoffel(phi, gphi),
                           cy.conformal_christoffel(phi, gphi), atol=1e-13)
        assert np.allclose(_kernels_py.conformal_hessian(phi, gphi, gf, hf),
                           cy.conformal_hessian(phi, gphi, gf, hf), atol=1e-13)
        assert np.allclose(_kernels_py.gqe_residual(phi, gphi, hphi, gf, hf, nu, lam),
                           cy.gqe_residual(phi, gphi, hphi, gf, hf, nu, lam), atol=1e-12)


def test_selected_backend_exposes_all_kernels():
    for name in ("conformal_ricci", "conformal_christoffel",
                 "conformal_hessian", "gqe_residual"):
        assert callable(getattr(kernels, name))
    assert kernels.BACKEND in ("cython", "python")
