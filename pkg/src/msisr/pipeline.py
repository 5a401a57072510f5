"""End-to-end super-resolution pipeline.

Stage order: normalize each measured band by its own 2nd/98th percentiles,
coarsely upsample and subsample to estimate the spectral subspace, solve
for the representation coefficients (pixel-wise closed form, or ADMM on
the exact problem), synthesize the subspace reconstruction, apply per-band
residual correction

    x_hat_i = x_svd_i + B_i (y_i - A_i x_svd_i),

and finally invert the normalization.  Residual correction fuses the
measured low frequencies with the reconstructed high frequencies; for a
factor-1 band it collapses to the measurement itself.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .admm import AdmmConfig, run_admm
from .errors import NumericalError, ValidationError
from .image import Band, MultispectralImage, denormalize_band, normalize_band, validate
from .resample import (
    BicubicUpsampleOp,
    BlockAverageOp,
    bicubic_upsample,
    block_average,
)
from .solver import SolverConfig, resolution_weights, solve_coefficients, synthesize
from .subspace import SubsampleSpec, coarse_upsample_stack, estimate_subspace


@dataclass
class PipelineResult:
    msi_out: MultispectralImage          # all bands at factor 1, denormalized
    x_svd: np.ndarray                    # uncorrected subspace stack (normalized units)
    x_corrected: np.ndarray              # corrected stack (normalized units)
    norm_params: list
    timings: dict = field(default_factory=dict)
    model: object = None
    diagnostics: object = None           # AdmmDiagnostics for the iterative solver


def correct_band(x_svd_band, y_band, factor):
    """Residual correction for one band; factor 1 returns the measurement
    bit-for-bit (both operators are the identity)."""
    x_svd_band = np.ascontiguousarray(x_svd_band, dtype=np.float64)
    y_band = np.ascontiguousarray(y_band, dtype=np.float64)
    if factor == 1:
        if y_band.shape != x_svd_band.shape:
            raise ValidationError("band shapes disagree in residual correction")
        return y_band.copy()
    op = BlockAverageOp(factor, *x_svd_band.shape)
    if y_band.shape != (op.lr_rows, op.lr_cols):
        raise ValidationError(
            f"measured band {y_band.shape} does not match {op.lr_rows, op.lr_cols}"
        )
    residual = y_band - block_average(op, x_svd_band)
    up = BicubicUpsampleOp(factor, op.lr_rows, op.lr_cols)
    return x_svd_band + bicubic_upsample(up, residual)


def _require_valid(msi):
    report = validate(msi)
    if not report.ok:
        raise ValidationError("invalid image: " + "; ".join(report.violations))


def _solve_stage(bands_norm, factors, model, weights, config, solver, admm_config):
    if solver == "pixel-linear":
        return solve_coefficients(bands_norm, factors, model, weights, config), None
    if solver == "admm":
        z, _, diag = run_admm(bands_norm, factors, model, weights, config, admm_config)
        return z, diag
    raise ValidationError(f"unknown solver {solver!r}")


def super_resolve(
    msi,
    config=None,
    *,
    solver="pixel-linear",
    admm_config=None,
    residual_correction=True,
    require_convergence=False,
):
    """Run the full pipeline and return every intermediate a caller needs for
    evaluation, ablation, or diagnostics."""
    config = config or SolverConfig()
    _require_valid(msi)
    timings = {}
    shape = (msi.finest_rows, msi.finest_cols)
    factors = msi.factors

    t0 = time.perf_counter()
    normalized = [normalize_band(b) for b in msi.bands]
    bands_norm = [nb.values for nb, _ in normalized]
    norm_params = [p for _, p in normalized]
    timings["normalize"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    stack = coarse_upsample_stack(bands_norm, factors)
    timings["upsample_stack"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    spec = SubsampleSpec(config.resolve_n_samples(msi.n_pixels), config.seed)
    model, _ = estimate_subspace(stack, config.n_components, spec)
    timings["subspace"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    weights = resolution_weights(factors, config.gamma_hr)
    z, diagnostics = _solve_stage(
        bands_norm, factors, model, weights, config, solver, admm_config
    )
    timings["coefficient_solve"] = time.perf_counter() - t0
    if require_convergence and diagnostics is not None and not diagnostics.converged:
        raise NumericalError(
            f"iterative solver did not converge in {diagnostics.iterations} iterations"
        )

    t0 = time.perf_counter()
    x_svd = synthesize(z, model)
    timings["synthesize"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if residual_correction:
        corrected_cols = [
            correct_band(x_svd[:, i].reshape(shape), bands_norm[i], factors[i]).reshape(-1)
            for i in range(msi.n_bands)
        ]
        x_corrected = np.stack(corrected_cols, axis=1)
    else:
        x_corrected = x_svd.copy()
    timings["residual_correction"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    out_bands = []
    for i, band in enumerate(msi.bands):
        hr = Band(x_corrected[:, i].reshape(shape), 1, band.name)
        out_bands.append(denormalize_band(hr, norm_params[i]))
    msi_out = MultispectralImage(tuple(out_bands), *shape)
    timings["denormalize"] = time.perf_counter() - t0

    return PipelineResult(
        msi_out=msi_out,
        x_svd=x_svd,
        x_corrected=x_corrected,
        norm_params=norm_params,
        timings=timings,
        model=model,
        diagnostics=diagnostics,
    )


def super_resolve_admm(msi, config=None, admm_config=None, **kwargs):
    """The same pipeline with the exact iterative coefficient solver."""
    return super_resolve(
        msi, config, solver="admm", admm_config=admm_config or AdmmConfig(), **kwargs
    )


def bicubic_baseline(msi):
    """Plain per-band bicubic upsampling, the reference the subspace method
    has to beat on the low-resolution bands."""
    shape = (msi.finest_rows, msi.finest_cols)
    out = []
    for band in msi.bands:
        if band.factor == 1:
            hr = band.values.copy()
        else:
            hr = bicubic_upsample(
                BicubicUpsampleOp(band.factor, band.rows, band.cols), band.values
            )
        if hr.shape != shape:
            raise ValidationError("band does not upsample to the finest grid")
        out.append(Band(hr, 1, band.name))
    return MultispectralImage(tuple(out), *shape)


def svd_stage_image(result, msi):
    """The uncorrected subspace reconstruction as a denormalized image (for
    the with/without-correction ablation)."""
    shape = (msi.finest_rows, msi.finest_cols)
    bands = []
    for i, band in enumerate(msi.bands):
        hr = Band(result.x_svd[:, i].reshape(shape), 1, band.name)
        bands.append(denormalize_band(hr, result.norm_params[i]))
    return MultispectralImage(tuple(bands), *shape)
