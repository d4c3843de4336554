"""Throughput of the numba and numpy detector kernels on identical inputs.

    python benchmarks/bench_kernels.py --clusters 200000
"""

import argparse
import time

import numpy as np

from mciksc import kernels
from mciksc.codec import build_codebook, psk_points

CASES = [(2, 1, 2), (4, 1, 4), (4, 2, 4), (4, 2, 8), (8, 4, 4)]


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--clusters", type=int, default=100_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    backends = {"numpy": kernels.NUMPY_KERNELS, "numba": kernels.numba_kernels()}
    rng = np.random.default_rng(0)
    print(f"{'config':>10} {'kernel':>6} " + " ".join(f"{b + ' Mcl/s':>13}" for b in backends) + f" {'speedup':>8}")
    for n, k, m in CASES:
        b = args.clusters
        y = rng.normal(size=(b, n)) + 1j * rng.normal(size=(b, n))
        h = rng.normal(size=(b, n)) + 1j * rng.normal(size=(b, n))
        points, sets = psk_points(m), build_codebook(n, k).array
        for name in ("ml", "gd"):
            rates = []
            for kern in backends.values():
                call = (lambda: kern.ml_detect(y, h, points, sets)) if name == "ml" else (
                    lambda: kern.gd_detect(y, h, points, k))
                call()  # warm-up and JIT compile
                rates.append(b / best_of(call, args.repeats) / 1e6)
            print(f"{f'({n},{k},{m})':>10} {name:>6} " + " ".join(f"{r:13.2f}" for r in rates)
                  + f" {rates[1] / rates[0]:7.1f}x")


if __name__ == "__main__":
    main()
