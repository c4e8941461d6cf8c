"""Time the compiled theta kernels against their NumPy twins.

Run with ``python3 benchmarks/bench_kernels.py [--repeat R]``.
"""
import argparse
import timeit

import numpy as np

from torusvortex import _backend

L, W, NTERMS = 1.0, 1.0, 12


def cases(rng):
    x = rng.uniform(-0.5, 0.5, 256 * 256)
    y = rng.uniform(-0.5, 0.5, 256 * 256)
    out = {
        "green_eval 65536 points": lambda k: k.green_eval(x, y, L, W, NTERMS),
        "green_grad 65536 points": lambda k: k.green_grad(x, y, L, W, NTERMS),
        "theta_phase 65536 points": lambda k: k.theta_phase(x, y, L, W, NTERMS),
    }
    for n in (4, 16, 64):
        pos = rng.uniform(0, 1, (n, 2))
        deg = np.where(np.arange(n) % 2 == 0, 1, -1)
        out[f"pair_gradient_sums {n} vortices"] = lambda k, p=pos, d=deg: k.pair_gradient_sums(p, d, L, W, NTERMS)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    py = _backend._kernels_py
    if _backend.BACKEND != "cython":
        print("compiled kernels not built; only the fallback is available")
        return
    cy = _backend.kernels
    print(f"{'kernel':32s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, f in cases(np.random.default_rng(1)).items():
        n = 20 if "pair" in name else 3
        tp = min(timeit.repeat(lambda: f(py), number=n, repeat=args.repeat)) / n
        tc = min(timeit.repeat(lambda: f(cy), number=n, repeat=args.repeat)) / n
        print(f"{name:32s} {1e3 * tp:12.3f} {1e3 * tc:12.3f} {tp / tc:8.2f}")


if __name__ == "__main__":
    main()
