"""Multiband image model on a common finest grid, plus percentile normalization.

A :class:`MultispectralImage` holds bands that live on sub-grids of one
finest grid: a band with downsampling factor ``L`` has ``finest_rows / L``
by ``finest_cols / L`` pixels.  Construction is permissive; structural
problems are reported by :func:`validate` so callers can surface them with
context instead of hitting bare exceptions.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


def _as_grid(values):
    arr = np.array(values, dtype=np.float64, order="C", copy=True)
    if arr.ndim != 2 or arr.size == 0:
        raise ValidationError("band values must form a non-empty 2-D grid")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Band:
    """One spectral band: a 2-D grid plus its downsampling factor."""

    values: np.ndarray
    factor: int = 1
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", _as_grid(self.values))
        if int(self.factor) < 1:
            raise ValidationError(f"band factor must be >= 1, got {self.factor}")
        object.__setattr__(self, "factor", int(self.factor))

    @property
    def rows(self):
        return self.values.shape[0]

    @property
    def cols(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class MultispectralImage:
    """Ordered bands over one finest grid (row-major pixel indexing)."""

    bands: tuple
    finest_rows: int
    finest_cols: int

    def __post_init__(self):
        object.__setattr__(self, "bands", tuple(self.bands))
        if self.finest_rows < 1 or self.finest_cols < 1:
            raise ValidationError("finest grid dimensions must be positive")

    @property
    def n_bands(self):
        return len(self.bands)

    @property
    def n_pixels(self):
        return self.finest_rows * self.finest_cols

    @property
    def band_names(self):
        return [b.name for b in self.bands]

    @property
    def factors(self):
        return [b.factor for b in self.bands]


@dataclass(frozen=True)
class NormParams:
    """2nd and 98th percentile of one measured band, kept for inversion."""

    p2: float
    p98: float

    @property
    def scale(self):
        # Degenerate (constant) bands use scale 1 so the affine map stays invertible.
        s = self.p98 - self.p2
        return s if s != 0.0 else 1.0


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


def validate(msi):
    """Check structural invariants; returns a report, never raises."""
    report = ValidationReport()
    if msi.n_bands == 0:
        report.violations.append("image has no bands")
        return report
    if msi.n_bands < 2:
        report.violations.append("image has fewer than 2 bands")
    if not any(b.factor == 1 for b in msi.bands):
        report.violations.append("no full-resolution band (factor 1) present")
    for i, b in enumerate(msi.bands):
        label = f"band {i}" + (f" ({b.name!r})" if b.name else "")
        if msi.finest_rows % b.factor or msi.finest_cols % b.factor:
            report.violations.append(
                f"{label}: finest grid {msi.finest_rows}x{msi.finest_cols} "
                f"not divisible by factor {b.factor}"
            )
        elif (b.rows, b.cols) != (msi.finest_rows // b.factor, msi.finest_cols // b.factor):
            report.violations.append(
                f"{label}: shape {b.rows}x{b.cols} does not match "
                f"{msi.finest_rows // b.factor}x{msi.finest_cols // b.factor} "
                f"expected at factor {b.factor}"
            )
        if not np.all(np.isfinite(b.values)):
            report.violations.append(f"{label}: non-finite values")
    return report


def percentile(values, p):
    """Linear-interpolation percentile at rank p/100*(n-1) (type 7)."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValidationError("empty sample")
    if not 0.0 <= p <= 100.0:
        raise ValidationError(f"percentile must be in [0, 100], got {p}")
    return float(np.percentile(arr, p, method="linear"))


def normalize_band(band):
    """Affine map sending the band's p2 to 0 and p98 to 1 (no clipping)."""
    params = NormParams(percentile(band.values, 2.0), percentile(band.values, 98.0))
    out = (band.values - params.p2) / params.scale
    return Band(out, band.factor, band.name), params


def denormalize_band(band, params):
    """Inverse of :func:`normalize_band` using the measured band's percentiles."""
    out = params.scale * band.values + params.p2
    return Band(out, band.factor, band.name)
