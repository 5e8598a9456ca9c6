"""Opt-in micro-benchmarks for the spectral kernels.

Pure observation: timing never changes numerical results, and nothing here
gates the test suite (throughput depends on the host).
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import median

import numpy as np

from .corrections import ScalarPropagator
from .grids import make_grid
from .nls import NLSPropagator, build_initial_data
from .potentials import MatrixPotentialSpec, decompose

__all__ = ["BenchRecord", "bench_kernels", "bench_sweep_scaling"]


@dataclass(frozen=True)
class BenchRecord:
    kernel: str
    grid_size: int
    n_levels: int
    threads: int
    steps_per_second: float


def _two_level_spec():
    jb = "(1+x^2)^(-1/2)"
    return MatrixPotentialSpec.from_strings(
        ["x^2/2", "x^2/2"], [f"cos(x)*{jb}", f"sin(x)*{jb}", f"-cos(x)*{jb}"])


def _gaussian(y):
    return np.pi**-0.25 * np.exp(-(y**2) / 2.0)


def _time_steps(step_fn, n_steps):
    t0 = time.perf_counter()
    step_fn(n_steps)
    return n_steps / (time.perf_counter() - t0)


def bench_kernels(sizes, thread_counts=(1,), repeats: int = 5,
                  steps: int = 50) -> list:
    """Median split-step throughput per (kernel, grid size, thread count) cell."""
    records = []
    for n in sizes:
        if n & (n - 1):
            raise ValueError("benchmark grid sizes must be powers of two")
        grid = make_grid(-10.0, 10.0, n)
        data = decompose(_two_level_spec(), grid)
        eps = 0.05
        state = build_initial_data(_gaussian, 0.0, 0.0,
                                   data.frames[0][:, :, 0], eps, grid, 1.0)
        prop = NLSPropagator(data, eps, 1.0, 1e-3)
        scalar = ScalarPropagator(grid, data.branches[0], eps)
        g0 = state.values[:, 0].copy()

        def run_vector(k, values=state.values):
            v = values.copy()
            for _ in range(k):
                v = prop.step(v)

        def run_scalar(k):
            v = g0.copy()
            for _ in range(k):
                v = scalar.step(v, 1e-3)

        for threads in thread_counts:
            for name, fn in (("nls_step", run_vector), ("scalar_step", run_scalar)):
                if threads == 1:
                    rates = [_time_steps(fn, steps) for _ in range(repeats)]
                else:
                    def batch(k):
                        with ThreadPoolExecutor(max_workers=threads) as pool:
                            list(pool.map(lambda _: fn(k), range(threads)))
                    rates = [threads * _time_steps(batch, steps)
                             for _ in range(repeats)]
                records.append(BenchRecord(kernel=name, grid_size=n,
                                           n_levels=2, threads=threads,
                                           steps_per_second=median(rates)))
    return records


def bench_sweep_scaling(n_jobs: int = 4, threads: int = 4,
                        grid_size: int = 4096, steps: int = 200) -> dict:
    """Wall-time speedup of a mock ε-sweep: n_jobs independent solves, run
    serially and then on a thread pool."""
    grid = make_grid(-10.0, 10.0, grid_size)
    data = decompose(_two_level_spec(), grid)

    def job(eps):
        state = build_initial_data(_gaussian, 0.0, 0.0,
                                   data.frames[0][:, :, 0], eps, grid, 1.0)
        prop = NLSPropagator(data, eps, 1.0, 1e-3)
        v = state.values
        for _ in range(steps):
            v = prop.step(v)
        return v

    epsilons = [0.05 / (1 + i) for i in range(n_jobs)]
    t0 = time.perf_counter()
    for e in epsilons:
        job(e)
    serial = time.perf_counter() - t0
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(job, epsilons))
    parallel = time.perf_counter() - t0
    return {"n_jobs": n_jobs, "threads": threads, "serial_seconds": serial,
            "parallel_seconds": parallel, "speedup": serial / parallel}
