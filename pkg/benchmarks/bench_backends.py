#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-Python fallback.

Times the plant integration kernel, the streaming IIR kernel, and a full
end-to-end scenario run on each available backend.

Usage: python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import time

import numpy as np

import seadiag
from seadiag import _backend, bundled_scenario, load_scenario


def best_of(fn, repeats):
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        timings.append(time.perf_counter() - start)
    return min(timings)


def bench_simulate(kernels):
    pp = np.array([100.0, 0.02, 105.05, 0.2, 0.0035, 2.0, 0.001,
                   0.02, 2.0, 0.05])
    x0 = np.zeros(5)
    out = np.empty((10001, 7))

    def run():
        status = kernels.simulate_sea(pp, x0, 0, 20.0, 1.0, 0.0,
                                      0.0005, 20000, 2, out)
        assert status == -1

    return run


def bench_iir(kernels):
    x = np.random.default_rng(0).normal(size=200_000)
    y = np.empty_like(x)
    state = np.zeros(2)

    def run():
        state[:] = 0.0
        kernels.iir2_run(0.2, 0.1, 0.05, -1.3, 0.4, state, x, y)

    return run


def bench_full_run(scenario):
    def run():
        seadiag.run(scenario)

    return run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = _backend.available()
    scenario = load_scenario(bundled_scenario("nominal"))
    results = {}
    for name in backends:
        _backend.use(name)
        kernels = _backend.kernels()
        results[name] = {
            "plant 20k RK4 steps": best_of(bench_simulate(kernels), args.repeats),
            "iir2 200k samples": best_of(bench_iir(kernels), args.repeats),
            "full nominal run": best_of(bench_full_run(scenario), args.repeats),
        }

    width = max(len(k) for k in next(iter(results.values())))
    header = f"{'benchmark':<{width}}"
    for name in backends:
        header += f"  {name:>12}"
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for bench in next(iter(results.values())):
        line = f"{bench:<{width}}"
        for name in backends:
            line += f"  {results[name][bench] * 1e3:>10.2f}ms"
        if len(backends) == 2:
            ratio = results["python"][bench] / results["compiled"][bench]
            line += f"  {ratio:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
