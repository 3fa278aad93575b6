#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy twins.

Run directly: ``python benchmarks/compare_backends.py``. Sizes mimic the
real workload: ~20k pooled 9-d features, 23 centers, 5 runs, 32-bit
codes over a few hundred training columns.
"""

import time

import numpy as np

from skelhash.kernels import _numpy
from skelhash.solver import sgn

try:
    from skelhash.kernels import _numba
except ImportError:
    _numba = None


def timeit(fn, *args, repeats=20):
    fn(*args)  # warmup / JIT
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return 1000.0 * (time.perf_counter() - t0) / repeats


def main():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((20000, 9))
    centers = rng.standard_normal((23, 9))
    labels = rng.integers(0, 23, size=20000)
    code = np.where(rng.standard_normal(32) >= 0, 1, -1).astype(np.int8)
    codes = np.where(rng.standard_normal((32, 500)) >= 0, 1, -1).astype(np.int8)
    b = sgn(rng.standard_normal((32, 500)))
    gram = rng.standard_normal((32, 8))
    gram = gram @ gram.T
    target = rng.standard_normal((32, 500))

    cases = [
        ("nearest_center", (x, centers)),
        ("accumulate_clusters", (x, labels, 23)),
        ("vlad_residuals", (x, centers)),
        ("vlad_residuals_assigned", (x, labels, centers)),
        ("hamming_distances", (code, codes)),
        ("dcc_sweeps", None),  # needs fresh state per call
    ]
    backends = [("numpy", _numpy)] + ([("numba", _numba)] if _numba else [])
    print(f"{'kernel':<26}" + "".join(f"{name + ' ms':>12}" for name, _ in backends))
    for name, args in cases:
        row = f"{name:<26}"
        for _, mod in backends:
            fn = getattr(mod, name)
            if name == "dcc_sweeps":
                def run(fn=fn):
                    fn(b.copy(), target, gram, 20)
                ms = timeit(run)
            else:
                ms = timeit(fn, *args)
            row += f"{ms:12.3f}"
        print(row)
    if _numba is None:
        print("numba unavailable; only the numpy backend was timed")


if __name__ == "__main__":
    main()
