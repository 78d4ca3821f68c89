"""Time the compiled and pure-Python kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from cgl_blowup import Grid
from cgl_blowup import _kernels
from cgl_blowup.functionals import gn_constant_estimate


def cases(rng):
    u1 = rng.standard_normal(1 << 16) + 1j * rng.standard_normal(1 << 16)
    u2 = rng.standard_normal((256, 256)) + 1j * rng.standard_normal((256, 256))
    grid = Grid(16.0, 256)
    yield "nonlinear_power 1d n=65536", lambda impl: _kernels.nonlinear_power(u1, 2.5, impl)
    yield "nonlinear_power 1d alpha=2", lambda impl: _kernels.nonlinear_power(u1, 2.0, impl)
    yield "nonlinear_power 2d 256^2", lambda impl: _kernels.nonlinear_power(u2, 1.0, impl)
    yield "power_sum 1d n=65536", lambda impl: _kernels.power_sum(u1, 4.5, impl)
    yield "power_sum 1d p=4", lambda impl: _kernels.power_sum(u1, 4.0, impl)
    yield "gn estimate alpha=2 n=256", lambda impl: gn_constant_estimate(2.0, 1, grid, impl=impl)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = _kernels.backends()
    if "compiled" not in names:
        print("compiled kernels not built; only the python backend is timed")
    rng = np.random.default_rng(0)
    print(f"{'case':32s}" + "".join(f"{n:>12s}" for n in names) + "     speedup")
    for label, fn in cases(rng):
        times = {}
        for name, mod in names.items():
            fn(mod)  # warm caches
            loops, _ = timeit.Timer(lambda: fn(mod)).autorange()
            best = min(timeit.repeat(lambda: fn(mod), number=loops, repeat=args.repeat))
            times[name] = best / loops
        row = f"{label:32s}" + "".join(f"{times[n] * 1e3:10.2f}ms" for n in names)
        if "compiled" in times:
            row += f"  {times['python'] / times['compiled']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
