"""Benchmark: compiled sampling kernels vs the NumPy fallback.

Times the raw kernels on synthetic workloads and a full finite-population
value estimation on the firms benchmark with each backend.  Both backends
consume pre-drawn uniforms identically, so the outputs agree bitwise; only
the speed differs.

Run:  python benchmarks/bench_backends.py
"""
import time

import numpy as np

import cmfc.backend as backend
from cmfc import _kernels_py
from cmfc.envmodel import firms_env
from cmfc.nagent import estimate_values, sample_initial_joint_state
from cmfc.policy import SoftmaxPolicy
from cmfc.rng import derive_rng
from cmfc.simplex import StateDistribution

try:
    from cmfc import _kernels as _compiled
except ImportError:
    _compiled = None


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernels():
    rng = derive_rng(0, "bench")
    print(f"{'kernel workload':<42}{'numpy':>12}{'compiled':>12}{'speedup':>10}")
    for n_groups, k, n in ((10, 2, 1_000), (20, 10, 10_000), (64, 64, 100_000)):
        p = rng.dirichlet(np.ones(k), size=n_groups)
        cdfs = backend.make_cdf(p)
        sizes = rng.multinomial(n, np.full(n_groups, 1.0 / n_groups)).astype(np.int64)
        u = rng.random(n)
        t_py = timeit(lambda: _kernels_py.grouped_counts(cdfs, sizes, u))
        label = f"grouped_counts groups={n_groups} k={k} n={n}"
        if _compiled is None:
            print(f"{label:<42}{t_py * 1e6:>10.0f}us{'-':>12}{'-':>10}")
            continue
        assert np.array_equal(_compiled.grouped_counts(cdfs, sizes, u),
                              _kernels_py.grouped_counts(cdfs, sizes, u))
        t_cy = timeit(lambda: _compiled.grouped_counts(cdfs, sizes, u))
        print(f"{label:<42}{t_py * 1e6:>10.0f}us{t_cy * 1e6:>10.0f}us"
              f"{t_py / t_cy:>9.1f}x")


def bench_simulation():
    env = firms_env()
    mu0 = StateDistribution(np.full(10, 0.1))
    policy = SoftmaxPolicy(derive_rng(1, "bench-pol").normal(0, 0.5, size=(10, 2, 11)))
    print(f"\n{'firms value estimation (8 episodes)':<42}{'time':>12}{'v_r':>12}")
    impls = [("numpy", _kernels_py)] + ([("compiled", _compiled)] if _compiled else [])
    for tag, impl in impls:
        backend.grouped_counts = impl.grouped_counts
        backend.categorical_indices = impl.categorical_indices
        for n in (100, 1000, 10_000):
            rng = derive_rng(2, "bench-eval", n)
            x0 = sample_initial_joint_state(mu0, n, rng)
            start = time.perf_counter()
            est = estimate_values(x0, policy, env, 0.9, episodes=8, tol=1e-6, rng=rng)
            elapsed = time.perf_counter() - start
            print(f"{tag + f' N={n}':<42}{elapsed:>10.2f}s{est.v_r:>12.5f}")


if __name__ == "__main__":
    if _compiled is None:
        print("compiled kernels unavailable; showing numpy fallback only\n")
    bench_kernels()
    bench_simulation()
