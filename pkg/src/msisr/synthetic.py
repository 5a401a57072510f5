"""Synthetic scenes and the reduced-resolution simulation protocol.

Ground-truth scenes are exactly low-rank (coefficient fields times an
orthonormal spectral basis plus a mean), so subspace-estimation error can
be separated from model error.  Simulation degrades each ground-truth band
by its target factor either with the exact forward model (block averaging)
or with an anti-aliased track (box prefilter followed by bicubic
decimation), then adds seeded white Gaussian noise.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from . import kernels
from .errors import ValidationError
from .image import Band, MultispectralImage
from .resample import BlockAverageOp, block_average, resample_tables, uniform_tables

SIMULATION_MODES = ("block", "aa")


@dataclass(frozen=True)
class SimulationSpec:
    factor: int = 1              # global downsampling applied on top of band factors
    mode: str = "block"
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.factor < 1:
            raise ValidationError(f"factor must be >= 1, got {self.factor}")
        if self.mode not in SIMULATION_MODES:
            raise ValidationError(f"mode must be one of {SIMULATION_MODES}")
        if self.noise_sigma < 0:
            raise ValidationError("noise sigma must be >= 0")


def _antialiased_decimate(x, factor):
    """Box prefilter of width ``factor`` per axis (mirror boundary), then
    Catmull-Rom sampling at the decimated pixel centers."""
    rows, cols = x.shape
    bidx, bw = uniform_tables(cols, factor)
    x = kernels.gather_axis1(x, bidx, bw)
    bidx, bw = uniform_tables(rows, factor)
    x = kernels.gather_axis0(x, bidx, bw)
    coords_c = (np.arange(cols // factor, dtype=np.float64) + 0.5) * factor - 0.5
    coords_r = (np.arange(rows // factor, dtype=np.float64) + 0.5) * factor - 0.5
    idx, w = resample_tables(cols, coords_c)
    x = kernels.gather_axis1(x, idx, w)
    idx, w = resample_tables(rows, coords_r)
    return kernels.gather_axis0(x, idx, w)


def simulate_dataset(gt, spec, band_factors=None):
    """Degrade a full-resolution image into a measured one.

    Band i is downsampled by spec.factor * band_factors[i] (band_factors
    defaults to all ones) and labeled with factor band_factors[i]: a global
    spec.factor shrinks the finest grid itself, which is how a
    reduced-resolution evaluation set is produced from full-resolution
    truth.  Block mode matches the forward model exactly; aa mode uses the
    anti-aliased track.  Noise is drawn band by band from one seeded stream.
    """
    if band_factors is None:
        band_factors = [1] * gt.n_bands
    if len(band_factors) != gt.n_bands:
        raise ValidationError("one target factor per band required")
    if gt.finest_rows % spec.factor or gt.finest_cols % spec.factor:
        raise ValidationError(
            f"finest grid {gt.finest_rows}x{gt.finest_cols} not divisible by "
            f"global factor {spec.factor}"
        )
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    out = []
    for band, target in zip(gt.bands, band_factors):
        if band.factor != 1:
            raise ValidationError("simulation input must be at full resolution")
        total = spec.factor * int(target)
        hr = band.values
        if hr.shape[0] % total or hr.shape[1] % total:
            raise ValidationError(
                f"band {band.name!r}: shape {hr.shape} not divisible by factor {total}"
            )
        if total == 1:
            low = hr.copy()
        elif spec.mode == "block":
            low = block_average(BlockAverageOp(total, *hr.shape), hr)
        else:
            low = _antialiased_decimate(np.ascontiguousarray(hr), total)
        if spec.noise_sigma > 0:
            low = low + rng.normal(0.0, spec.noise_sigma, size=low.shape)
        out.append(Band(low, int(target), band.name))
    return MultispectralImage(
        tuple(out), gt.finest_rows // spec.factor, gt.finest_cols // spec.factor
    )


@dataclass(frozen=True)
class TrueScene:
    """The factors a synthetic scene was built from, for oracle-based tests."""

    coefficients: np.ndarray  # (n_pixels, k_true)
    basis: np.ndarray         # (n_bands, k_true), orthonormal columns
    mean: np.ndarray          # (n_bands,)


def _orthonormal_basis(rng, n_bands, k_true):
    raw = rng.normal(size=(n_bands, k_true))
    q, _ = np.linalg.qr(raw)
    q = q[:, :k_true].copy()
    for k in range(k_true):
        pivot = int(np.argmax(np.abs(q[:, k])))
        if q[pivot, k] < 0:
            q[:, k] = -q[:, k]
    return q


def generate_synthetic_scene(rows, cols, k_true, smoothness, band_factors, seed):
    """Exactly rank-k_true scene: smooth seeded coefficient fields times an
    orthonormal basis plus a band-wise mean.  All bands come out at factor 1;
    ``band_factors`` fixes the band count and names the intended degradation
    pattern for later simulation.  smoothness is the Gaussian correlation
    length in pixels; an infinite value gives constant coefficient fields."""
    n_bands = len(band_factors)
    if k_true >= n_bands:
        raise ValidationError("scene rank must be below the band count")
    for f in band_factors:
        if rows % f or cols % f:
            raise ValidationError(f"grid {rows}x{cols} not divisible by factor {f}")
    rng = np.random.Generator(np.random.PCG64(seed))
    basis = _orthonormal_basis(rng, n_bands, k_true)
    coeffs = np.empty((rows * cols, k_true))
    for k in range(k_true):
        white = rng.normal(size=(rows, cols))
        if np.isinf(smoothness):
            smooth = np.zeros((rows, cols))
        else:
            smooth = gaussian_filter(white, sigma=smoothness, mode="reflect")
            std = smooth.std()
            if std > 0:
                smooth = smooth / std
        coeffs[:, k] = (0.2 / (k + 1)) * smooth.reshape(-1)
    mean = rng.uniform(0.3, 0.7, size=n_bands)
    stack = coeffs @ basis.T + mean[None, :]
    bands = tuple(
        Band(stack[:, i].reshape(rows, cols), 1, f"b{i}") for i in range(n_bands)
    )
    gt = MultispectralImage(bands, rows, cols)
    return gt, TrueScene(coeffs, basis, mean)
