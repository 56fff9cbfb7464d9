"""Benchmark the compiled curvature kernels against the pure NumPy fallback.

Run:  python3 benchmarks/bench_kernels.py [--repeat 20000]

The four pointwise assembly kernels dominate grid verification, so this is
the comparison that justifies (or not) building the extension on a given
platform.
"""

from __future__ import annotations

import argparse
import importlib
import time

import numpy as np

from gqelab import _kernels_py

try:
    _kernels_cy = importlib.import_module("gqelab._kernels_cy")
except ImportError:
    _kernels_cy = None


def _inputs(n: int, rng: np.random.Generator):
    phi = 0.5 + rng.random()
    gphi = rng.normal(size=n)
    hphi = rng.normal(size=(n, n))
    hphi = 0.5 * (hphi + hphi.T)
    gf = rng.normal(size=n)
    hf = rng.normal(size=(n, n))
    hf = 0.5 * (hf + hf.T)
    return phi, np.ascontiguousarray(gphi), np.ascontiguousarray(hphi), \
        np.ascontiguousarray(gf), np.ascontiguousarray(hf)


def _time(fn, args, repeat: int) -> float:
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=20000)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    print(f"{'kernel':<24}{'n':>3}  {'python':>12}  {'cython':>12}  {'speedup':>8}")
    for n in (3, 5, 8):
        phi, gphi, hphi, gf, hf = _inputs(n, rng)
        cases = [
            ("conformal_ricci", (phi, gphi, hphi)),
            ("conformal_christoffel", (phi, gphi)),
            ("conformal_hessian", (phi, gphi, gf, hf)),
            ("gqe_residual", (phi, gphi, hphi, gf, hf, 0.7, -1.3)),
        ]
        for name, arg in cases:
            t_py = _time(getattr(_kernels_py, name), arg, args.repeat)
            if _kernels_cy is None:
                print(f"{name:<24}{n:>3}  {t_py * 1e6:>10.2f}us  {'missing':>12}  {'-':>8}")
                continue
            t_cy = _time(getattr(_kernels_cy, name), arg, args.repeat)
            out_py = getattr(_kernels_py, name)(*arg)
            out_cy = getattr(_kernels_cy, name)(*arg)
            assert np.allclose(out_py, out_cy, atol=1e-13), name
            print(f"{name:<24}{n:>3}  {t_py * 1e6:>10.2f}us  {t_cy * 1e6:>10.2f}us  "
                  f"{t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
