"""Benchmark the compiled kernels against the pure numpy fallback.

Times the two hot paths on representative sizes: the simplex pivot loop
as driven by the weight tuner, and the retrieval dot-product scan.
Run: python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import random
import time

import numpy as np

from strategy_auction import _kernels_py, backends
from strategy_auction.scoring import FeatureRow
from strategy_auction.tuning import TuningInstance, build_milp, solve_exact

try:
    from strategy_auction import _kernels

    KERNELS = {"compiled": _kernels, "python": _kernels_py}
except ImportError:
    KERNELS = {"python": _kernels_py}


def bench_simplex_raw(impl, repeats=200):
    rng = np.random.default_rng(1)
    total = 0.0
    iters = 0
    for _ in range(repeats):
        m, n = 40, 60
        tab = rng.normal(size=(m + 1, n + 1))
        tab[:m, -1] = np.abs(tab[:m, -1])
        basis = np.arange(n - m, n, dtype=np.int64)
        tab = np.ascontiguousarray(tab)
        start = time.perf_counter()
        _, it = impl.simplex_iterate(tab, basis, 1e-9, 2000)
        total += time.perf_counter() - start
        iters += it
    return total, iters


def bench_dot(impl, n=10_000, d=256, queries=200):
    rng = np.random.default_rng(2)
    matrix = np.ascontiguousarray(rng.normal(size=(n, d)))
    qs = rng.normal(size=(queries, d))
    start = time.perf_counter()
    for q in qs:
        impl.dot_scores(matrix, np.ascontiguousarray(q))
    return time.perf_counter() - start


def bench_tuner(instances=10):
    """End-to-end solver timing under the active backend."""
    rng = random.Random(3)
    total = 0.0
    for _ in range(instances):
        agents = [f"a{i}" for i in range(3)]
        tasks = [f"t{i}" for i in range(4)]
        rows = {
            (t, a): FeatureRow(
                agent_id=a,
                price=rng.uniform(0.05, 0.4),
                token_count=rng.randint(40, 160),
                entropy=rng.random(),
                jury_scores={j: rng.randint(0, 5) for j in agents},
            )
            for t in tasks
            for a in agents
        }
        instance = TuningInstance(tasks=tasks, agents=agents, rows=rows)
        start = time.perf_counter()
        solve_exact(build_milp(instance))
        total += time.perf_counter() - start
    return total


def main() -> None:
    print(f"active backend: {backends.BACKEND_NAME}")
    print()
    print(f"{'kernel':<28}{'backend':<12}{'time':>10}")
    for name, impl in KERNELS.items():
        t, iters = bench_simplex_raw(impl)
        print(f"{'simplex pivots (40x60)':<28}{name:<12}{t:>9.3f}s  ({iters} pivots)")
    for name, impl in KERNELS.items():
        t = bench_dot(impl)
        print(f"{'dot scan (10k x 256) x200':<28}{name:<12}{t:>9.3f}s")
    t = bench_tuner()
    print(f"{'tuner end-to-end (10 MILPs)':<28}{backends.BACKEND_NAME:<12}{t:>9.3f}s")
    print()
    print("note: retrieval pins the numpy dot kernel for cross-build rank")
    print("stability; the simplex dispatches to the compiled kernel when built.")


if __name__ == "__main__":
    main()
