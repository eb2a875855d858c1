#!/usr/bin/env python3
"""Compare the compiled phase kernels against the pure-NumPy fallback.

Run from the repository root after an editable install:

    python benchmarks/bench_backends.py [--repeats 5]

Times the three hot kernels at representative sizes (Monte Carlo batches of
small coupling matrices, one large full matrix with extended-precision
phases, and a discretization-sized Fourier kernel) and prints the speedup.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from losmimo import _kernels_py

try:
    from losmimo import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    d, lam = 4.0e8, 0.01
    inv_ld = 1.0 / (lam * d)

    tx3 = rng.uniform(-4e4, 4e4, (256, 3))
    rx3 = rng.uniform(-4e4, 4e4, (256, 3))
    txb = rng.uniform(-1e3, 1e3, (2048, 16, 2))
    rxb = rng.uniform(-1e3, 1e3, (2048, 16, 2))
    tx2 = rng.uniform(-1e3, 1e3, (4096, 2))
    rx2 = rng.uniform(-1e3, 1e3, (4096, 2))

    cases = [
        ("fresnel 256x256 (long double)", lambda k: k.fresnel_phase_matrix(tx3, rx3, d, lam)),
        ("fourier batch 2048x16x16", lambda k: k.fourier_phase_matrices(txb, rxb, inv_ld)),
        ("fourier 4096x4096", lambda k: k.fourier_phase_matrix(tx2, rx2, inv_ld)),
    ]

    print(f"{'kernel':35s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, call in cases:
        t_py = _time(lambda: call(_kernels_py), args.repeats)
        if _kernels is None:
            print(f"{name:35s} {t_py * 1e3:9.2f}ms {'n/a':>10s} {'n/a':>8s}")
            continue
        t_c = _time(lambda: call(_kernels), args.repeats)
        err = float(np.abs(call(_kernels) - call(_kernels_py)).max())
        print(f"{name:35s} {t_py * 1e3:9.2f}ms {t_c * 1e3:9.2f}ms {t_py / t_c:7.2f}x  (max |diff| {err:.1e})")


if __name__ == "__main__":
    main()
