"""Compare the compiled and numpy filter-bank kernels.

    python benchmarks/bench_kernels.py [--sizes 64,128,256] [--repeat 5]

Times one analysis and one synthesis pass of each bank, then a short
solver run with each backend, and checks that both backends agree.
"""

import argparse
import time
import timeit

import numpy as np

from tntf import _backend, solver
from tntf.framelet import bank_analysis, bank_synthesis, dct_bank, dhf_bank
from tntf.imagecore import make_synthetic
from tntf.sim import DegradationSpec, degrade


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def bench_banks(sizes, repeat):
    names = _backend.available()
    print(f"{'bank':<5} {'size':>5} {'op':<10}" + "".join(f"{n:>12}" for n in names)
          + ("     speedup" if len(names) > 1 else ""))
    rng = np.random.default_rng(0)
    for size in sizes:
        x = rng.random((size, size))
        for bank in (dhf_bank(1), dct_bank(2)):
            taps = bank.stacked()
            c = rng.standard_normal((taps.shape[0], size, size))
            for op, fn in (("analysis", lambda k: bank_analysis(x, taps, bank.anchor,
                                                                  bank.dilation, backend=k)),
                           ("synthesis", lambda k: bank_synthesis(c, taps, bank.anchor,
                                                                   bank.dilation, backend=k))):
                outs, times = [], []
                for n in names:
                    k = _backend.get(n)
                    outs.append(fn(k))
                    times.append(best_of(lambda: fn(k), repeat, 5))
                for o in outs[1:]:
                    assert np.allclose(o, outs[0], rtol=0, atol=1e-12), "backends disagree"
                row = f"{bank.name:<5} {size:>5} {op:<10}" + "".join(f"{t * 1e3:>10.3f}ms"
                                                                     for t in times)
                if len(times) > 1:
                    row += f"{times[-1] / times[0]:>11.1f}x"
                print(row)


def bench_solver(size, iters):
    u = make_synthetic("square-circle", size, 0)
    z = degrade(u, DegradationSpec(0.03, 0))
    cfg = solver.SolverConfig(base_lambda=3e-4, sigma=0.03, max_iters=iters)
    images = {}
    saved = _backend.kernels
    try:
        for n in _backend.available():
            _backend.kernels = _backend.get(n)
            solver.restore(z, cfg)  # warm the norm caches
            t0 = time.perf_counter()
            images[n] = solver.restore(z, cfg).image
            dt = time.perf_counter() - t0
            print(f"tntf restore {size}x{size}, {iters} iterations, {n:<7}: {dt:.2f} s "
                  f"({dt / iters * 1e3:.1f} ms/iter)")
    finally:
        _backend.kernels = saved
    vals = list(images.values())
    for v in vals[1:]:
        print(f"max |difference| between backends: {np.max(np.abs(v - vals[0])):.2e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="64,128,256")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--solver-size", type=int, default=128)
    ap.add_argument("--solver-iters", type=int, default=100)
    args = ap.parse_args()
    print(f"available backends: {', '.join(_backend.available())} (default: {_backend.name})")
    bench_banks([int(s) for s in args.sizes.split(",")], args.repeat)
    bench_solver(args.solver_size, args.solver_iters)


if __name__ == "__main__":
    main()
