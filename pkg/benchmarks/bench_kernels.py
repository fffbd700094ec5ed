"""Benchmark the compiled Connect 4 search kernel against the pure-Python
fallback.

The depth-limited search runs inside the training loop (once per scripted
opponent move and once per shaped reward), so its throughput bounds the
experiment harness. Run with::

    python3 benchmarks/bench_kernels.py [--depth 3] [--positions 50]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from minimax_exploiter import _c4pure
from minimax_exploiter.kernels import KERNEL_BACKEND, c4_root_values


def random_positions(n: int, rng: np.random.Generator):
    positions = []
    while len(positions) < n:
        grid = np.zeros((6, 7), dtype=np.int8)
        heights = [0] * 7
        mover = 1
        for _ in range(int(rng.integers(4, 28))):
            col = int(rng.choice([c for c in range(7) if heights[c] < 6]))
            grid[heights[col], col] = mover
            heights[col] += 1
            if _c4pure.c4_winner(grid) != 0:  # keep positions non-terminal
                grid[heights[col] - 1, col] = 0
                heights[col] -= 1
                continue
            mover = 3 - mover
        positions.append((grid, mover))
    return positions


def bench(fn, positions, depth, repeats):
    start = time.perf_counter()
    for _ in range(repeats):
        for grid, mover in positions:
            fn(grid, mover, depth)
    elapsed = time.perf_counter() - start
    return elapsed / (repeats * len(positions))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--depth", type=int, default=3)
    parser.add_argument("--positions", type=int, default=50)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    positions = random_positions(args.positions, rng)

    # correctness cross-check before timing anything
    for grid, mover in positions:
        a = c4_root_values(grid, mover, args.depth)
        b = _c4pure.c4_root_values(grid, mover, args.depth)
        assert np.allclose(a, b, equal_nan=True), "backends disagree"

    pure_s = bench(_c4pure.c4_root_values, positions, args.depth,
                   args.repeats)
    print(f"pure python : {pure_s * 1e6:9.1f} us/position")
    if KERNEL_BACKEND == "cython":
        fast_s = bench(c4_root_values, positions, args.depth, args.repeats)
        print(f"cython      : {fast_s * 1e6:9.1f} us/position")
        print(f"speedup     : {pure_s / fast_s:9.1f}x at depth {args.depth}")
    else:
        print("compiled kernel unavailable; only the fallback was timed")


if __name__ == "__main__":
    main()
