"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-N wall time per kernel and backend, the speedup and the
largest difference between the two backends' outputs.
"""
import argparse
import timeit

import numpy as np

from abdirac import _kernels_py

try:
    from abdirac import _kernels
except ImportError:
    _kernels = None


def cases():
    rng = np.random.default_rng(0)
    n = 4000
    d = np.ascontiguousarray(rng.normal(size=n))
    e = np.ascontiguousarray(rng.normal(size=n - 1))
    lam = np.linspace(0.5, 0.99, 32)
    ones = np.ones_like(lam)
    rk = (np.log(1e-6), 0.01, 1600, ones, 0.1 * ones, lam, 0.3, 0.1, 0)
    path = (np.log(1e-6), 0.01, 1600, 1.0, 0.1, 0.9, 0.3, 0.1, 0)
    return {"sturm_count (n=4000)": ("sturm_count", (d, e)),
            "rk4_final (32 energies x 1600 steps)": ("rk4_final", rk),
            "rk4_path (1600 steps)": ("rk4_path", path)}


def _diff(x, y):
    if isinstance(x, tuple):
        return max(_diff(a, b) for a, b in zip(x, y))
    return float(np.max(np.abs(np.asarray(x, float) - np.asarray(y, float))))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':40s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s} {'max diff':>10s}")
    for label, (name, argv) in cases().items():
        backends = [_kernels_py] + ([_kernels] if _kernels else [])
        times = [min(timeit.repeat(lambda m=m: getattr(m, name)(*argv), number=1,
                                   repeat=args.repeat)) * 1e3 for m in backends]
        if len(times) == 2:
            diff = _diff(getattr(_kernels_py, name)(*argv), getattr(_kernels, name)(*argv))
            print(f"{label:40s} {times[0]:12.2f} {times[1]:12.2f} {times[0] / times[1]:8.1f} {diff:10.1e}")
        else:
            print(f"{label:40s} {times[0]:12.2f} {'-':>12s}")


if __name__ == "__main__":
    main()
