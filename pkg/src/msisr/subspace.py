"""Spectral subspace estimation from a subsample of the coarsely upsampled stack.

The band-wise mean and the leading right-singular vectors are estimated
from N_s randomly chosen pixels of the bicubically upsampled image.  The
SVD runs as a cyclic Jacobi eigendecomposition of the small (bands x bands)
Gram matrix, which keeps the cost independent of N_s and the result
deterministic across platforms and thread counts.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .resample import BicubicUpsampleOp, bicubic_upsample
from .rng import sample_indices


@dataclass(frozen=True)
class SubspaceModel:
    """Estimated band-wise mean, orthonormal spectral basis, singular values.

    ``singular_values`` are already floored (see :func:`singular_value_floor`)
    so their inverse squares are always formed safely.
    """

    mean: np.ndarray            # (n_bands,)
    basis: np.ndarray           # (n_bands, k), orthonormal columns
    singular_values: np.ndarray  # (k,), descending, floored

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64).ravel())
        object.__setattr__(self, "basis", np.ascontiguousarray(self.basis, dtype=np.float64))
        object.__setattr__(
            self, "singular_values", np.asarray(self.singular_values, dtype=np.float64).ravel()
        )
        if self.basis.ndim != 2 or self.basis.shape[0] != self.mean.size:
            raise ValidationError("basis must be (n_bands, k) matching the mean length")
        if self.singular_values.size != self.basis.shape[1]:
            raise ValidationError("one singular value per basis column required")

    @property
    def n_bands(self):
        return self.basis.shape[0]

    @property
    def n_components(self):
        return self.basis.shape[1]


@dataclass(frozen=True)
class SubsampleSpec:
    count: int
    seed: int = 0


def default_sample_count(n_pixels, n_components):
    """sqrt(N_p) subsampled pixels, floored at 4k for tiny images."""
    return max(math.ceil(math.sqrt(n_pixels)), 4 * n_components)


def singular_value_floor(values):
    """Clamp singular values at 1e-8 * largest (1e-12 absolute if all zero)."""
    values = np.asarray(values, dtype=np.float64)
    top = values[0] if values.size else 0.0
    floor = 1e-8 * top if top > 0.0 else 1e-12
    return np.maximum(values, floor)


def coarse_upsample_stack(bands, factors):
    """Bicubically upsample every band to the finest grid; column i is band i
    rasterized row-major.  Factor-1 bands are copied bit-for-bit."""
    if len(bands) != len(factors):
        raise ValidationError("bands and factors length mismatch")
    ref = None
    cols = []
    for band, factor in zip(bands, factors):
        band = np.ascontiguousarray(band, dtype=np.float64)
        if factor == 1:
            hr = band.copy()
        else:
            hr = bicubic_upsample(BicubicUpsampleOp(factor, *band.shape), band)
        if ref is None:
            ref = hr.shape
        elif hr.shape != ref:
            raise ValidationError(
                f"band upsampled to {hr.shape}, expected common grid {ref}"
            )
        cols.append(hr.reshape(-1))
    return np.ascontiguousarray(np.stack(cols, axis=1))


def subsample_rows(stack, spec):
    """Rows drawn uniformly without replacement by the seeded generator."""
    n_pixels = stack.shape[0]
    if spec.count > n_pixels:
        raise ValidationError(f"cannot subsample {spec.count} of {n_pixels} rows")
    idx = sample_indices(n_pixels, spec.count, spec.seed)
    return stack[idx], idx


def column_mean(data):
    data = np.asarray(data, dtype=np.float64)
    if data.size == 0:
        raise ValidationError("empty sample matrix")
    return data.mean(axis=0)


def jacobi_eigh(sym, tol=1e-14, max_sweeps=60):
    """Cyclic-by-rows Jacobi eigendecomposition of a small symmetric matrix.

    Sweeps until the off-diagonal Frobenius norm drops below
    tol * max(1, ||A||_F).  Returns eigenvalues in descending order (stable
    among ties) and the matching eigenvector columns.
    """
    a = np.array(sym, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValidationError("jacobi_eigh needs a square matrix")
    v = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = math.sqrt(max(float(np.sum(a * a) - np.sum(np.diag(a) ** 2)), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = a[q, q] - a[p, p]
                if abs(apq) < 1e-150 * abs(tau):
                    t = apq / tau  # small-angle limit; avoids overflow in theta
                else:
                    theta = tau / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
    eigvals = np.diag(a).copy()
    order = np.argsort(-eigvals, kind="stable")
    return eigvals[order], v[:, order]


def _fix_signs(basis):
    """Flip each column so its largest-magnitude entry (lowest index on ties)
    is positive; makes the factorization deterministic."""
    basis = basis.copy()
    for k in range(basis.shape[1]):
        col = basis[:, k]
        pivot = int(np.argmax(np.abs(col)))  # argmax returns the lowest index on ties
        if col[pivot] < 0.0:
            basis[:, k] = -col
    return basis


def truncated_svd(centered, n_components):
    """Top-k singular values and right-singular vectors of a centered matrix,
    via the Gram matrix eigendecomposition."""
    centered = np.ascontiguousarray(centered, dtype=np.float64)
    n_rows, n_bands = centered.shape
    if n_components > min(n_rows, n_bands):
        raise ValidationError(
            f"k={n_components} exceeds matrix rank bound min{(n_rows, n_bands)}"
        )
    # Sequential accumulation (no BLAS) keeps the result thread-count invariant.
    gram = np.einsum("si,sj->ij", centered, centered, optimize=False)
    eigvals, vecs = jacobi_eigh(gram)
    sing = np.sqrt(np.maximum(eigvals[:n_components], 0.0))
    basis = _fix_signs(vecs[:, :n_components])
    return sing, basis


def estimate_subspace(stack, n_components, spec):
    """Mean + truncated SVD of a seeded row subsample of the stack."""
    if not n_components < spec.count:
        raise NumericalError(
            f"subsample count {spec.count} must exceed subspace dimension {n_components}"
        )
    data, idx = subsample_rows(stack, spec)
    mean = column_mean(data)
    sing, basis = truncated_svd(data - mean, n_components)
    model = SubspaceModel(mean, basis, singular_value_floor(sing))
    return model, idx
