"""Pixel-wise closed-form coefficient solver.

Eliminating the spatial coupling (the block-average Gram operator acts as
1/L**2 on smooth images) turns the normal equations into one shared k x k
system applied independently at every pixel:

    Z [ sum_i gamma_i v_i^T v_i + (lambda sigma^2 / k) S^-2 ] = R

with v_i = row i of the spectral basis, S the floored singular values, and
R the adjoint-projected data term.  The bracket is symmetric positive
definite and factorized once; the remaining work is linear in the pixel
count.

All cross-pixel products go through np.einsum with optimize=False, whose
fixed sequential loop keeps results bit-identical across thread counts
(BLAS would not guarantee that).
"""

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import NumericalError, ValidationError
from .resample import BlockAverageOp, block_average_adjoint
from .subspace import default_sample_count


@dataclass(frozen=True)
class SolverConfig:
    """Solver knobs; defaults are the tuned values used throughout."""

    sigma: float = 0.02          # assumed measurement-noise std (normalized units)
    n_components: int = 2        # spectral subspace dimension
    gamma_hr: float = 0.99       # weight share of the full-resolution bands
    reg_weight: float = 0.5      # spectral regularization strength
    n_samples: int | None = None  # subsampled pixels; None -> sqrt(N_p) rule
    seed: int = 0

    # JSON keys use the conventional symbol names.
    _JSON_KEYS = {
        "sigma": "sigma",
        "N_s": "n_samples",
        "K": "n_components",
        "gamma_HR": "gamma_hr",
        "lambda": "reg_weight",
        "seed": "seed",
    }

    def __post_init__(self):
        if self.sigma < 0:
            raise ValidationError(f"sigma must be >= 0, got {self.sigma}")
        if self.n_components < 1:
            raise ValidationError(f"K must be >= 1, got {self.n_components}")
        if not 0.0 < self.gamma_hr < 1.0:
            raise ValidationError(f"gamma_HR must lie in (0, 1), got {self.gamma_hr}")
        if self.reg_weight < 0:
            raise ValidationError(f"lambda must be >= 0, got {self.reg_weight}")
        if self.n_samples is not None and self.n_samples <= self.n_components:
            raise ValidationError(
                f"N_s={self.n_samples} must exceed K={self.n_components}"
            )

    def resolve_n_samples(self, n_pixels):
        if self.n_samples is not None:
            if self.n_samples > n_pixels:
                raise ValidationError(
                    f"N_s={self.n_samples} exceeds pixel count {n_pixels}"
                )
            return self.n_samples
        return min(default_sample_count(n_pixels, self.n_components), n_pixels)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else dict(text)
        unknown = set(data) - set(cls._JSON_KEYS)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {cls._JSON_KEYS[k]: v for k, v in data.items()}
        return cls(**kwargs)

    def to_json_dict(self):
        inv = {attr: key for key, attr in self._JSON_KEYS.items()}
        return {inv[a]: getattr(self, a) for a in inv}

    def with_seed(self, seed):
        return replace(self, seed=seed)


@dataclass(frozen=True)
class GammaWeights:
    """Per-resolution data-fit weights; they sum to 1 over resolutions."""

    by_factor: dict

    def __getitem__(self, factor):
        return self.by_factor[factor]

    @property
    def factors(self):
        return sorted(self.by_factor)


def resolution_weights(factors, gamma_hr):
    """Weight 1 across resolutions: the full-resolution share is gamma_hr and
    the rest is split over the lower resolutions proportionally to 1/L."""
    distinct = sorted(set(int(f) for f in factors))
    if 1 not in distinct:
        raise ValidationError("a full-resolution band (factor 1) is required")
    if not 0.0 < gamma_hr < 1.0:
        raise ValidationError(f"gamma_HR must lie in (0, 1), got {gamma_hr}")
    lower = [f for f in distinct if f > 1]
    weights = {1: gamma_hr}
    if lower:
        inv_sum = sum(1.0 / f for f in lower)
        scale = (1.0 - gamma_hr) / inv_sum
        for f in lower:
            weights[f] = scale / f
    return GammaWeights(weights)


@dataclass(frozen=True)
class PixelLinearSystem:
    rhs: np.ndarray  # (n_pixels, k)
    lhs: np.ndarray  # (k, k), symmetric positive definite for lambda > 0


def assemble_rhs(bands, factors, model, weights):
    """Data term: for each band, subtract its mean entry, push through the
    scaled block-average adjoint, and accumulate against its basis row."""
    n_pixels = None
    rhs = None
    for i, (band, factor) in enumerate(zip(bands, factors)):
        band = np.ascontiguousarray(band, dtype=np.float64)
        hr_rows, hr_cols = band.shape[0] * factor, band.shape[1] * factor
        if n_pixels is None:
            n_pixels = hr_rows * hr_cols
            rhs = np.zeros((n_pixels, model.n_components))
        elif hr_rows * hr_cols != n_pixels:
            raise ValidationError(f"band {i} does not share the finest grid")
        op = BlockAverageOp(factor, hr_rows, hr_cols)
        adj = block_average_adjoint(op, band - model.mean[i]).reshape(-1)
        scale = weights[factor] * factor * factor
        for k in range(model.n_components):
            rhs[:, k] += (scale * model.basis[i, k]) * adj
    if rhs is None:
        raise ValidationError("no bands provided")
    return rhs


def assemble_lhs(model, weights, factors, reg_weight, sigma):
    """Shared k x k system matrix: weighted basis-row Gram plus the diagonal
    spectral regularizer (lambda sigma^2 / k) S^-2."""
    k = model.n_components
    lhs = np.zeros((k, k))
    for i, factor in enumerate(factors):
        row = model.basis[i : i + 1, :]
        lhs += weights[factor] * (row.T @ row)
    reg = reg_weight * sigma * sigma / k
    lhs[np.diag_indices(k)] += reg / (model.singular_values**2)
    return lhs


def build_pixel_system(bands, factors, model, weights, config):
    return PixelLinearSystem(
        rhs=assemble_rhs(bands, factors, model, weights),
        lhs=assemble_lhs(model, weights, factors, config.reg_weight, config.sigma),
    )


def cholesky_lower(a):
    """Deterministic k x k Cholesky; raises NumericalError when not SPD."""
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    low = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s = a[i, j]
            for p in range(j):
                s -= low[i, p] * low[j, p]
            if i == j:
                if not s > 0.0 or not math.isfinite(s):
                    raise NumericalError("system is singular; increase lambda")
                low[i, j] = math.sqrt(s)
            else:
                low[i, j] = s / low[j, j]
    return low


def solve_pixel_linear(system):
    """Solve z_p lhs = rhs_p for every pixel with one shared factorization."""
    low = cholesky_lower(system.lhs)
    z = np.ascontiguousarray(system.rhs, dtype=np.float64).copy()
    kernels.cholesky_solve_inplace(low, z)
    return z


def synthesize(z, model):
    """Back to band space: coefficient image times basis, plus the mean."""
    z = np.asarray(z, dtype=np.float64)
    out = np.einsum("pk,bk->pb", z, model.basis, optimize=False)
    out += model.mean[None, :]
    return out


def analyze(stack, model):
    """Projection onto the subspace: (X - mean) basis."""
    stack = np.asarray(stack, dtype=np.float64)
    return np.einsum("pb,bk->pk", stack - model.mean[None, :], model.basis, optimize=False)


def solve_coefficients(bands, factors, model, weights, config):
    return solve_pixel_linear(build_pixel_system(bands, factors, model, weights, config))
