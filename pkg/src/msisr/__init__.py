"""Multispectral image super-resolution toolkit.

Recovers a common-resolution multispectral image from bands measured at
mixed resolutions: a spectral subspace is estimated from a pixel
subsample, representation coefficients are solved pixel by pixel in closed
form (with an exact iterative reference solver for verification), and a
residual correction re-imposes the measured low frequencies on each band.
"""

from .admm import AdmmConfig, dense_oracle_solve, run_admm
from .analysis import (
    BoundReport,
    coefficient_error_bound,
    deviation_quadratic,
    operator_deviation_analytic,
    operator_deviation_dense,
    operator_error_on_image,
    solver_gap,
)
from .bundle import BundleManifest, export_png, read_bundle, write_bundle
from .errors import BundleIOError, MsisrError, NumericalError, ValidationError
from .image import (
    Band,
    MultispectralImage,
    NormParams,
    ValidationReport,
    denormalize_band,
    normalize_band,
    percentile,
    validate,
)
from .metrics import MetricsReport, evaluate_reconstruction, nrmse, ssim
from .pipeline import (
    PipelineResult,
    bicubic_baseline,
    correct_band,
    super_resolve,
    super_resolve_admm,
)
from .resample import (
    BicubicUpsampleOp,
    BlockAverageOp,
    bicubic_upsample,
    block_average,
    block_average_adjoint,
    gram_apply,
    lowpass,
)
from .solver import (
    GammaWeights,
    PixelLinearSystem,
    SolverConfig,
    assemble_lhs,
    assemble_rhs,
    build_pixel_system,
    resolution_weights,
    solve_pixel_linear,
    synthesize,
)
from .subspace import (
    SubsampleSpec,
    SubspaceModel,
    coarse_upsample_stack,
    column_mean,
    estimate_subspace,
    subsample_rows,
    truncated_svd,
)
from .synthetic import (
    SimulationSpec,
    generate_synthetic_scene,
    simulate_dataset,
)

__version__ = "0.1.0"
