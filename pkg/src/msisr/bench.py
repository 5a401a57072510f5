"""Runtime benchmarks: pixel-count scaling of the pipeline stages and a
compiled-vs-python comparison of the kernel backends."""

import time

import numpy as np

from . import kernels
from .pipeline import super_resolve, super_resolve_admm
from .solver import SolverConfig
from .synthetic import SimulationSpec, generate_synthetic_scene, simulate_dataset

BENCH_BAND_FACTORS = [1, 1, 2, 2]  # keeps every benchmark size divisible


def _best_of(fn, repeats=3):
    best = None
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, result


def make_bench_scene(size, seed=1234):
    gt, _ = generate_synthetic_scene(size, size, 2, max(2.0, size / 24), BENCH_BAND_FACTORS, seed)
    return simulate_dataset(gt, SimulationSpec(factor=1), BENCH_BAND_FACTORS)


def benchmark_scaling(sizes, config=None, repeats=3, include_admm_at=None):
    """Per-size stage timings of the pixel-wise pipeline; optionally also the
    iterative pipeline at one size for the speed-ratio comparison."""
    config = config or SolverConfig()
    rows = []
    for size in sizes:
        msi = make_bench_scene(size)
        super_resolve(msi, config)  # warm-up (allocators, code paths)
        best, result = _best_of(lambda: super_resolve(msi, config), repeats)
        entry = {
            "size": size,
            "n_pixels": size * size,
            "total_seconds": best,
            "stages": {k: float(v) for k, v in result.timings.items()},
        }
        if include_admm_at == size:
            best_admm, res_admm = _best_of(lambda: super_resolve_admm(msi, config), 1)
            entry["admm_total_seconds"] = best_admm
            entry["admm_iterations"] = res_admm.diagnostics.iterations
        rows.append(entry)
    return rows


def benchmark_backends(size=256, repeats=3, seed=99):
    """Time each kernel under every available backend on one random image."""
    rng = np.random.Generator(np.random.PCG64(seed))
    x = np.ascontiguousarray(rng.normal(size=(size, size)))
    lr = np.ascontiguousarray(rng.normal(size=(size // 2, size // 2)))
    from .resample import resample_tables

    coords = (np.arange(size, dtype=np.float64) + 0.5) / 2 - 0.5
    idx, w = resample_tables(size // 2, coords)
    rhs = np.ascontiguousarray(rng.normal(size=(size * size, 2)))
    chol = np.array([[1.2, 0.0], [0.3, 0.9]])

    cases = {
        "block_average": lambda: kernels.block_average_core(x, 2),
        "block_adjoint": lambda: kernels.block_adjoint_core(lr, 2),
        "block_gram": lambda: kernels.block_gram_core(x, 2),
        "gather_axis0": lambda: kernels.gather_axis0(lr, idx, w),
        "gather_axis1": lambda: kernels.gather_axis1(lr, idx, w),
        "cholesky_solve": lambda: kernels.cholesky_solve_inplace(chol, rhs.copy()),
    }
    report = {"size": size, "backends": {}}
    previous = kernels.active_backend()
    try:
        for backend in kernels.available_backends():
            kernels.select_backend(backend)
            timings = {}
            for name, fn in cases.items():
                fn()  # warm-up
                best, _ = _best_of(fn, repeats)
                timings[name] = best
            report["backends"][backend] = timings
    finally:
        kernels.select_backend(previous)
    if {"compiled", "python"} <= set(report["backends"]):
        report["speedup_compiled_over_python"] = {
            name: report["backends"]["python"][name] / report["backends"]["compiled"][name]
            for name in cases
        }
    return report


def run_bench(sizes, report_admm_size=256, repeats=3):
    return {
        "kernel_backend": kernels.active_backend(),
        "scaling": benchmark_scaling(
            sizes,
            repeats=repeats,
            include_admm_at=report_admm_size if report_admm_size in sizes else None,
        ),
        "kernels": benchmark_backends(min(256, max(sizes))),
    }
