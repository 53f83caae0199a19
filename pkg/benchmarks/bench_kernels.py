"""Compare the compiled association kernels against the pure-Python path.

Times pairwise IoU plus greedy matching on random box sets of increasing
size, checks both backends agree exactly, and prints a small table.

Usage: python benchmarks/bench_kernels.py [--sizes 10,50,200,1000] [--repeat 20]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from roitel import _pyassoc
from roitel.kernels import backend_name

try:
    from roitel import _fastassoc
except ImportError:
    _fastassoc = None


def random_boxes(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.column_stack(
        [
            rng.uniform(0.0, 1280.0, n),
            rng.uniform(0.0, 720.0, n),
            rng.uniform(4.0, 120.0, n),
            rng.uniform(4.0, 120.0, n),
        ]
    )


def time_backend(mod, a: np.ndarray, b: np.ndarray, repeat: int) -> tuple[float, list]:
    best = float("inf")
    matches = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        m = mod.pairwise_iou(a, b)
        matches = mod.greedy_match(m, 0.3)
        best = min(best, time.perf_counter() - t0)
    return best, matches


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="10,50,200,1000")
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)

    print(f"active dispatch backend: {backend_name()}")
    if _fastassoc is None:
        print("compiled extension not available; timing the fallback only")

    header = f"{'n':>6}  {'python (ms)':>12}  {'compiled (ms)':>14}  {'speedup':>8}  agree"
    print(header)
    print("-" * len(header))
    for n in sizes:
        a = random_boxes(rng, n)
        b = random_boxes(rng, n)
        t_py, m_py = time_backend(_pyassoc, a, b, args.repeat)
        if _fastassoc is not None:
            t_fast, m_fast = time_backend(_fastassoc, a, b, args.repeat)
            agree = m_py == m_fast and np.array_equal(
                _pyassoc.pairwise_iou(a, b), _fastassoc.pairwise_iou(a, b)
            )
            print(
                f"{n:>6}  {t_py * 1e3:>12.3f}  {t_fast * 1e3:>14.3f}  "
                f"{t_py / t_fast:>7.1f}x  {agree}"
            )
            if not agree:
                return 1
        else:
            print(f"{n:>6}  {t_py * 1e3:>12.3f}  {'-':>14}  {'-':>8}  -")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
