"""Time the numba Jacobi kernels against their pure-numpy twins.

    python3 benchmarks/bench_kernels.py [--sizes 8 16 32 64] [--repeat 5]

Sizes are quaternion dimensions; the kernels run on the 2n x 2n adjoint.
The first numba call (compilation, or cache load) is excluded.
"""
import argparse
import time

import numpy as np

from quatstat import _accel, _kernels
from quatstat.qmatrix import QuatMatrix, to_complex_adjoint


def best_of(fn, arg, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(arg)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 32, 64])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if not _accel.HAS_NUMBA:
        print("numba is not installed; only the numpy kernels can run")
    g = np.random.default_rng(args.seed)
    pairs = [
        ("eigh", _kernels.jacobi_eigh_loops, _kernels.jacobi_eigh_numpy),
        ("svd", _kernels.jacobi_svd_loops, _kernels.jacobi_svd_numpy),
    ]
    print(f"{'kernel':<6} {'n':>4} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for n in args.sizes:
        A = QuatMatrix(g.standard_normal((n, n, 4)))
        inputs = {
            "eigh": np.ascontiguousarray(to_complex_adjoint(A + A.H)),
            "svd": np.ascontiguousarray(to_complex_adjoint(A)),
        }
        for name, loops, vec in pairs:
            a = inputs[name]
            loops(a)  # compile / warm
            t_nb = best_of(loops, a, args.repeat) if _accel.HAS_NUMBA else float("nan")
            t_np = best_of(vec, a, max(1, args.repeat // 2))
            print(f"{name:<6} {n:>4} {1e3 * t_nb:>10.3f} {1e3 * t_np:>10.3f} {t_np / t_nb:>8.1f}")


if __name__ == "__main__":
    main()
