"""Structured resampling operators: block averaging, its adjoint and Gram
operator, and Catmull-Rom bicubic upsampling.

Block averaging is the forward degradation model; it has unit DC gain
(constant images map to themselves).  The adjoint replicates each low-res
value over its block divided by factor**2, so <A x, y> == <x, A^T y>.
Bicubic upsampling uses the Catmull-Rom kernel (cubic convolution,
a = -0.5) with pixel-center alignment: output pixel I samples source
coordinate (I + 0.5) / factor - 0.5.  Boundaries mirror without edge
duplication.  All heavy loops run in the kernel backend.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ValidationError


@dataclass(frozen=True)
class BlockAverageOp:
    """Averaging over factor x factor blocks of an hr_rows x hr_cols grid."""

    factor: int
    hr_rows: int
    hr_cols: int

    def __post_init__(self):
        if self.factor < 1:
            raise ValidationError(f"factor must be >= 1, got {self.factor}")
        if self.hr_rows % self.factor or self.hr_cols % self.factor:
            raise ValidationError(
                f"grid {self.hr_rows}x{self.hr_cols} not divisible by factor {self.factor}"
            )

    @property
    def lr_rows(self):
        return self.hr_rows // self.factor

    @property
    def lr_cols(self):
        return self.hr_cols // self.factor


@dataclass(frozen=True)
class BicubicUpsampleOp:
    """Catmull-Rom upsampling of an lr_rows x lr_cols grid by ``factor``."""

    factor: int
    lr_rows: int
    lr_cols: int

    def __post_init__(self):
        if self.factor < 1:
            raise ValidationError(f"factor must be >= 1, got {self.factor}")
        if self.lr_rows < 1 or self.lr_cols < 1:
            raise ValidationError("low-resolution grid must be non-empty")


def _check(arr, shape, what):
    a = np.ascontiguousarray(arr, dtype=np.float64)
    if a.shape != shape:
        raise ValidationError(f"{what}: expected shape {shape}, got {a.shape}")
    return a


def block_average(op, x):
    x = _check(x, (op.hr_rows, op.hr_cols), "block_average input")
    if op.factor == 1:
        return x.copy()
    return kernels.block_average_core(x, op.factor)


def block_average_adjoint(op, y):
    y = _check(y, (op.lr_rows, op.lr_cols), "block_average_adjoint input")
    if op.factor == 1:
        return y.copy()
    return kernels.block_adjoint_core(y, op.factor)


def gram_apply(op, x):
    """adjoint(average(x)) in one fused pass per block."""
    x = _check(x, (op.hr_rows, op.hr_cols), "gram_apply input")
    if op.factor == 1:
        return x.copy()
    return kernels.block_gram_core(x, op.factor)


def catmull_rom_weights(t):
    """Tap weights at offsets (-1, 0, 1, 2) around floor(s), t = frac(s)."""
    t = np.asarray(t, dtype=np.float64)
    w0 = ((-0.5 * t + 1.0) * t - 0.5) * t
    w1 = (1.5 * t - 2.5) * t * t + 1.0
    w2 = ((-1.5 * t + 2.0) * t + 0.5) * t
    w3 = (0.5 * t - 0.5) * t * t
    return np.stack([w0, w1, w2, w3], axis=-1)


def _fold_indices(idx, n):
    """Mirror reflection without edge duplication (period 2(n-1))."""
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * (n - 1)
    m = np.abs(idx) % period
    return np.minimum(m, period - m)


def resample_tables(n_src, coords):
    """Catmull-Rom index/weight tables for sampling at fractional coords."""
    coords = np.asarray(coords, dtype=np.float64)
    base = np.floor(coords).astype(np.intp)
    t = coords - base
    taps = base[:, None] + np.arange(-1, 3, dtype=np.intp)[None, :]
    idx = np.ascontiguousarray(_fold_indices(taps, n_src))
    w = np.ascontiguousarray(catmull_rom_weights(t))
    return idx, w


def uniform_tables(n_src, width):
    """Index/weight tables for a same-size moving-average box of odd-centered
    ``width`` taps (offsets k - (width-1)//2), mirror boundary."""
    offsets = np.arange(width, dtype=np.intp) - (width - 1) // 2
    taps = np.arange(n_src, dtype=np.intp)[:, None] + offsets[None, :]
    idx = np.ascontiguousarray(_fold_indices(taps, n_src))
    w = np.full((n_src, width), 1.0 / width, dtype=np.float64)
    return idx, w


def _upsample_coords(n_out, factor):
    return (np.arange(n_out, dtype=np.float64) + 0.5) / factor - 0.5


def bicubic_upsample(op, y):
    y = _check(y, (op.lr_rows, op.lr_cols), "bicubic_upsample input")
    if op.factor == 1:
        return y.copy()
    idx_c, w_c = resample_tables(op.lr_cols, _upsample_coords(op.lr_cols * op.factor, op.factor))
    idx_r, w_r = resample_tables(op.lr_rows, _upsample_coords(op.lr_rows * op.factor, op.factor))
    tmp = kernels.gather_axis1(y, idx_c, w_c)
    return kernels.gather_axis0(tmp, idx_r, w_r)


def lowpass(x, factor):
    """bicubic_upsample(block_average(x)): the filter whose complement keeps
    the high-frequency content during residual correction."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    rows, cols = x.shape
    avg = block_average(BlockAverageOp(factor, rows, cols), x)
    return bicubic_upsample(BicubicUpsampleOp(factor, rows // factor, cols // factor), avg)
