"""Reconstruction quality metrics and their report container.

NRMSE is the ratio of l2 norms of the flattened arrays.  SSIM uses a 7x7
uniform window, C1 = (0.01 R)^2 and C2 = (0.03 R)^2 with R the ground-truth
band's value range, sample (n-1) variance normalization, and averages only
windows fully inside the image; that matches the widely used default
parameterization, without which SSIM numbers are not comparable.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

SSIM_WINDOW = 7


def nrmse(x_true, x_hat):
    """||x_hat - x_true|| / ||x_true|| over the flattened arrays."""
    x_true = np.asarray(x_true, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x_true.shape != x_hat.shape:
        raise ValidationError(f"shape mismatch: {x_true.shape} vs {x_hat.shape}")
    denom = float(np.linalg.norm(x_true.ravel()))
    if denom == 0.0:
        raise ValidationError("NRMSE undefined for an all-zero reference")
    return float(np.linalg.norm((x_hat - x_true).ravel())) / denom


def _window_means(img, win):
    """Mean over every fully interior win x win window, via summed-area table."""
    padded = np.zeros((img.shape[0] + 1, img.shape[1] + 1))
    padded[1:, 1:] = np.cumsum(np.cumsum(img, axis=0), axis=1)
    s = (
        padded[win:, win:]
        - padded[:-win, win:]
        - padded[win:, :-win]
        + padded[:-win, :-win]
    )
    return s / (win * win)


def ssim(x_true, x_hat, data_range=None):
    """Mean local SSIM; ``data_range`` overrides R (default max-min of x_true)."""
    x = np.asarray(x_true, dtype=np.float64)
    y = np.asarray(x_hat, dtype=np.float64)
    if x.shape != y.shape:
        raise ValidationError(f"shape mismatch: {x.shape} vs {y.shape}")
    if min(x.shape) < SSIM_WINDOW:
        raise ValidationError(
            f"both dimensions must be >= {SSIM_WINDOW} for the SSIM window"
        )
    if data_range is None:
        data_range = float(x.max() - x.min())
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2
    win = SSIM_WINDOW
    npix = win * win
    cov_norm = npix / (npix - 1)  # sample (n-1) normalization
    ux = _window_means(x, win)
    uy = _window_means(y, win)
    uxx = _window_means(x * x, win)
    uyy = _window_means(y * y, win)
    uxy = _window_means(x * y, win)
    vx = cov_norm * (uxx - ux * ux)
    vy = cov_norm * (uyy - uy * uy)
    vxy = cov_norm * (uxy - ux * uy)
    num = (2.0 * ux * uy + c1) * (2.0 * vxy + c2)
    den = (ux * ux + uy * uy + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


@dataclass
class BandMetrics:
    name: str
    source_factor: int
    nrmse: float
    ssim: float


@dataclass
class MetricsReport:
    bands: list = field(default_factory=list)
    mean_nrmse_sr: float | None = None
    mean_ssim_sr: float | None = None
    timings: dict = field(default_factory=dict)

    def to_json_dict(self):
        return {
            "bands": [
                {
                    "name": b.name,
                    "source_factor": b.source_factor,
                    "nrmse": b.nrmse,
                    "ssim": b.ssim,
                }
                for b in self.bands
            ],
            "mean_nrmse_sr": self.mean_nrmse_sr,
            "mean_ssim_sr": self.mean_ssim_sr,
            "timings": dict(self.timings),
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        report = cls(
            mean_nrmse_sr=data["mean_nrmse_sr"],
            mean_ssim_sr=data["mean_ssim_sr"],
            timings=dict(data.get("timings", {})),
        )
        report.bands = [
            BandMetrics(b["name"], b["source_factor"], b["nrmse"], b["ssim"])
            for b in data["bands"]
        ]
        return report


def evaluate_reconstruction(gt, x_hat, source_factors=None, timings=None):
    """Per-band NRMSE/SSIM plus means over the bands that were actually
    super-resolved (source factor > 1); ``source_factors`` carries the input
    image's per-band factors, defaulting to 'all super-resolved'."""
    if gt.n_bands != x_hat.n_bands:
        raise ValidationError("band count mismatch between truth and estimate")
    if source_factors is None:
        source_factors = [2] * gt.n_bands
    if len(source_factors) != gt.n_bands:
        raise ValidationError("one source factor per band required")
    report = MetricsReport(timings=dict(timings or {}))
    sr_nrmse, sr_ssim = [], []
    for i, (bt, bh) in enumerate(zip(gt.bands, x_hat.bands)):
        e = nrmse(bt.values, bh.values)
        s = ssim(bt.values, bh.values)
        report.bands.append(BandMetrics(bt.name or f"band{i}", int(source_factors[i]), e, s))
        if source_factors[i] > 1:
            sr_nrmse.append(e)
            sr_ssim.append(s)
    if sr_nrmse:
        report.mean_nrmse_sr = float(np.mean(sr_nrmse))
        report.mean_ssim_sr = float(np.mean(sr_ssim))
    return report
