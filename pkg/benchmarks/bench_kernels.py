"""Compare the compiled kernels against the pure-Python fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

Three workloads: a packed polynomial product, marching squares on a 513^2
field, and the end-to-end cleared identity residual (run in a subprocess per
backend, since the backend is chosen once at import).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hypogeo import _kernels, _pykernels

try:
    from hypogeo import _ckernels
except ImportError:
    _ckernels = None

END_TO_END = """
import time, numpy as np
from hypogeo import _kernels
from hypogeo.fields import heisenberg3d
from hypogeo.polynomial import Polynomial
from hypogeo.symcalc import cleared_identity_residual
rng = np.random.default_rng(0)
ws = [Polynomial.random(3, 4, rng, 3) for _ in range(20)]
t = time.perf_counter()
for w in ws:
    assert cleared_identity_residual(w, heisenberg3d()).is_zero()
print(_kernels.BACKEND, time.perf_counter() - t)
"""


def _poly_inputs(rng, n=400, span=20000):
    ka = np.unique(rng.integers(0, span, n)).astype(np.int64)
    kb = np.unique(rng.integers(0, span, n)).astype(np.int64)
    ca = rng.integers(-50, 50, ka.size).astype(np.int64)
    cb = rng.integers(-50, 50, kb.size).astype(np.int64)
    return ka, ca, kb, cb


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"active backend: {_kernels.BACKEND}")
    if _ckernels is None:
        print("compiled extension not built; only the fallback is timed")

    ka, ca, kb, cb = _poly_inputs(rng)
    field = np.ascontiguousarray(rng.standard_normal((513, 513)).cumsum(axis=0))
    rows = []
    py_poly = _best(lambda: _pykernels.poly_mul_packed(ka, ca.tolist(), kb, cb.tolist()), args.repeat)
    py_ms = _best(lambda: _pykernels.marching_squares(field, 0.0), args.repeat)
    if _ckernels is not None:
        c_poly = _best(lambda: _ckernels.poly_mul_packed(ka, ca, kb, cb), args.repeat)
        c_ms = _best(lambda: _ckernels.marching_squares(field, 0.0), args.repeat)
        rows += [("poly_mul (400x400 terms)", c_poly, py_poly),
                 ("marching_squares (513^2)", c_ms, py_ms)]
    else:
        rows += [("poly_mul (400x400 terms)", float("nan"), py_poly),
                 ("marching_squares (513^2)", float("nan"), py_ms)]

    e2e = {}
    for pure in ("0", "1"):
        env = dict(os.environ, HYPOGEO_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        e2e[out[0]] = float(out[1])
    rows.append(("identity residual x20 (Heisenberg, deg 4)",
                 e2e.get("cython", float("nan")), e2e["python"]))

    print(f"{'workload':44s} {'compiled [s]':>13s} {'python [s]':>11s} {'speedup':>8s}")
    for name, c, p in rows:
        print(f"{name:44s} {c:13.4f} {p:11.4f} {p / c:8.1f}x")


if __name__ == "__main__":
    main()
