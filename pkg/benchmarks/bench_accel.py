"""Timing of the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_accel.py [--sizes 200,800,2000] [--repeat 5] [--no-end-to-end]

Part one times each kernel in-process with ``impl=`` forced.  Part two runs a
full deformed solve (c=10, h=4, T=2, selection +R1;-R1) in fresh interpreters
with ARTIFACT_DISABLE_NUMBA unset and set, which is what a user toggles.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from artifact import _accel

END_TO_END = """
import time
from artifact.thermo import ModelParams, solve_epsilon
from artifact.deformed import solve_deformed
from artifact.lengths import correlation_length
from artifact import _accel
p = ModelParams(10.0, 4.0, 2.0)
solve_deformed(solve_epsilon(p), "+R1;-R1")          # warm-up (jit / cache load)
t = time.perf_counter()
for _ in range(3):
    d = solve_deformed(solve_epsilon(p), "+R1;-R1")
print(_accel.backend(), (time.perf_counter() - t) / 3, correlation_length(d).p.real)
"""


def kernel_cases(n, rng):
    x = rng.standard_normal(n) + 0.3j * rng.standard_normal(n)
    nodes = np.linspace(-8, 8, n)
    vals = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    z = 40 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return {
        "lieb_apply": lambda impl: _accel.lieb_apply(x, nodes, vals, 10.0, impl=impl),
        "lieb_prime_apply": lambda impl: _accel.lieb_prime_apply(x, nodes, vals, 10.0, impl=impl),
        "lieb_matrix": lambda impl: _accel.lieb_matrix(x, nodes, 10.0, impl=impl),
        "cauchy_apply": lambda impl: _accel.cauchy_apply(x + 0.5j, nodes, vals, impl=impl),
        "log1pexp": lambda impl: _accel.log1pexp(z, impl=impl),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="200,800,2000")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-end-to-end", action="store_true")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)

    if not _accel.HAVE_NUMBA:
        print("numba not importable; only the numpy path exists")
        return 1
    print(f"{'kernel':18s} {'n':>6s} {'numpy ms':>10s} {'numba ms':>10s} {'speed-up':>9s} {'max diff':>9s}")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, fn in kernel_cases(n, rng).items():
            a, b = fn("numpy"), fn("numba")          # also triggers compilation
            diff = float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a))))
            t_np = min(timeit.repeat(lambda: fn("numpy"), number=1, repeat=args.repeat))
            t_nb = min(timeit.repeat(lambda: fn("numba"), number=1, repeat=args.repeat))
            print(f"{name:18s} {n:6d} {1e3 * t_np:10.3f} {1e3 * t_nb:10.3f} "
                  f"{t_np / t_nb:8.1f}x {diff:9.1e}")

    if not args.no_end_to_end:
        print("\nend-to-end deformed solve (fresh interpreter, mean of 3 after warm-up)")
        for flag in ("0", "1"):
            env = dict(os.environ, ARTIFACT_DISABLE_NUMBA=flag)
            out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, check=True,
                                 capture_output=True, text=True).stdout.split()
            print(f"  ARTIFACT_DISABLE_NUMBA={flag}: backend={out[0]:6s} "
                  f"{float(out[1]):.3f} s   Re p = {out[2]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
