"""Shared fixtures-by-function for the test suite."""

import numpy as np

from msisr.image import normalize_band
from msisr.solver import SolverConfig, resolution_weights
from msisr.subspace import SubsampleSpec, coarse_upsample_stack, estimate_subspace
from msisr.synthetic import SimulationSpec, generate_synthetic_scene, simulate_dataset


def make_scene(seed, rows=8, cols=8, band_factors=(1, 1, 2), smoothness=2.0, noise=0.0, k_true=2):
    """Exactly low-rank scene plus its simulated (degraded) measurement."""
    gt, true = generate_synthetic_scene(rows, cols, k_true, smoothness, list(band_factors), seed)
    msi = simulate_dataset(
        gt, SimulationSpec(factor=1, noise_sigma=noise, seed=seed), list(band_factors)
    )
    return gt, msi, true


def make_tiny_problem(seed, rows=8, cols=8, band_factors=(1, 1, 2), config=None, k_true=2):
    """Normalized bands + estimated model + weights for solver-level tests."""
    config = config or SolverConfig()
    gt, msi, true = make_scene(seed, rows, cols, band_factors, k_true=k_true)
    bands = [normalize_band(b)[0].values for b in msi.bands]
    factors = msi.factors
    stack = coarse_upsample_stack(bands, factors)
    spec = SubsampleSpec(config.resolve_n_samples(msi.n_pixels), seed)
    model, _ = estimate_subspace(stack, config.n_components, spec)
    weights = resolution_weights(factors, config.gamma_hr)
    return {
        "gt": gt,
        "msi": msi,
        "true": true,
        "bands": bands,
        "factors": factors,
        "model": model,
        "weights": weights,
        "config": config,
    }


def dense_block_average_matrix(rows, cols, factor):
    """Dense block-average operator built by explicit index loops (independent
    of both the kernels and the Kronecker assembly)."""
    n_hr = rows * cols
    n_lr = (rows // factor) * (cols // factor)
    a = np.zeros((n_lr, n_hr))
    lr_cols = cols // factor
    for br in range(rows // factor):
        for bc in range(lr_cols):
            for i in range(factor):
                for j in range(factor):
                    a[br * lr_cols + bc, (br * factor + i) * cols + (bc * factor + j)] = (
                        1.0 / (factor * factor)
                    )
    return a
