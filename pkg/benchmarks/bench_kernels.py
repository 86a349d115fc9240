"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each kernel runs once untimed (JIT warm-up), then ``--repeat`` times; the
best wall time is reported. Outputs of the two paths are compared too.
"""

import argparse
import json
import time

import numpy as np

from burgers_rigidity import kernels


def cases(rng):
    n = 801
    vals = rng.standard_normal((n, n)).cumsum(axis=0) * 1e-2
    valid = rng.random((n, n)) > 0.01
    u = np.sin(np.linspace(-np.pi, np.pi, 200_000))
    ks = np.unique(np.geomspace(1, 5_000, 12).astype(np.int64))
    return {
        "fd_axis0": (vals, valid, 0.0125),
        "godunov": (u, 0.45),
        "forward_quotients": (u, 3e-5, ks),
        "jump_flags": (vals, valid, 5.0, 1e-8),
    }


def best_time(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype == bool:
        return bool(np.array_equal(a, b))
    return bool(np.allclose(a, b, rtol=1e-12, atol=1e-12, equal_nan=True))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json")
    args = ap.parse_args()
    if kernels.NUMBA is None:
        raise SystemExit("numba path disabled (BURGERS_RIGIDITY_NO_NUMBA set or numba missing)")
    rows = []
    for name, a in cases(np.random.default_rng(0)).items():
        t_np = best_time(kernels.NUMPY[name], a, args.repeat)
        t_nb = best_time(kernels.NUMBA[name], a, args.repeat)
        agree = same(kernels.NUMPY[name](*a), kernels.NUMBA[name](*a))
        rows.append({"kernel": name, "numpy_s": t_np, "numba_s": t_nb, "speedup": t_np / t_nb, "agree": agree})
        print(f"{name:18s} numpy {t_np * 1e3:9.2f} ms   numba {t_nb * 1e3:9.2f} ms   x{t_np / t_nb:6.1f}   "
              f"{'agree' if agree else 'DIFFER'}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
