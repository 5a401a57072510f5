"""Command-line interface.

Subcommands: simulate, superres, eval, verify-bounds, compare, bench,
export-png.  Exit codes: 0 success, 2 validation error, 3 numerical
failure, 4 I/O error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .admm import dense_oracle_solve
from .analysis import (
    coefficient_error_bound,
    deviation_quadratic,
    operator_deviation_analytic,
    operator_deviation_dense,
    solver_gap,
)
from .bench import run_bench
from .bundle import export_png, read_bundle, write_bundle
from .errors import BundleIOError, NumericalError, ValidationError
from .image import normalize_band, validate
from .pipeline import super_resolve, super_resolve_admm, svd_stage_image
from .metrics import evaluate_reconstruction
from .solver import SolverConfig, resolution_weights, solve_coefficients
from .subspace import SubsampleSpec, coarse_upsample_stack, estimate_subspace
from .synthetic import SimulationSpec, generate_synthetic_scene, simulate_dataset

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _write_json(path, payload):
    try:
        Path(path).write_text(json.dumps(payload, indent=2) + "\n")
    except OSError as exc:
        raise BundleIOError(f"cannot write report {path}: {exc}") from None


def _load_config(args):
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise BundleIOError(f"cannot read config {args.config}: {exc}") from None
        config = SolverConfig.from_json(text)
    else:
        config = SolverConfig()
    if getattr(args, "seed", None) is not None:
        config = config.with_seed(args.seed)
    return config


def _cmd_simulate(args):
    gt = read_bundle(args.gt)
    spec = SimulationSpec(args.factor, args.mode, args.noise, args.seed)
    if args.band_factors:
        try:
            band_factors = [int(s) for s in args.band_factors.split(",")]
        except ValueError:
            raise ValidationError(
                f"--band-factors must be comma-separated integers, got {args.band_factors!r}"
            ) from None
    else:
        band_factors = None
    out = simulate_dataset(gt, spec, band_factors)
    write_bundle(out, args.out)
    return 0


def _cmd_superres(args):
    msi = read_bundle(args.infile)
    config = _load_config(args)
    if args.solver == "admm":
        result = super_resolve_admm(
            msi, config, residual_correction=not args.no_residual_correction
        )
        if result.diagnostics is not None and not result.diagnostics.converged:
            if not args.allow_nonconverged:
                print(
                    f"error: ADMM did not converge in {result.diagnostics.iterations} "
                    "iterations (use --allow-nonconverged to keep the result)",
                    file=sys.stderr,
                )
                return EXIT_NUMERICAL
    else:
        result = super_resolve(
            msi, config, residual_correction=not args.no_residual_correction
        )
    write_bundle(result.msi_out, args.out)
    if args.dump_svd:
        write_bundle(svd_stage_image(result, msi), args.dump_svd)
    if args.timings:
        _write_json(args.timings, {"timings": result.timings})
    return 0


def _cmd_eval(args):
    gt = read_bundle(args.gt)
    pred = read_bundle(args.pred)
    source_factors = read_bundle(args.infile).factors if args.infile else None
    report = evaluate_reconstruction(gt, pred, source_factors)
    _write_json(args.report, report.to_json_dict())
    return 0


def _tiny_instance(seed):
    gt, _ = generate_synthetic_scene(8, 8, 2, 2.0, [1, 1, 2], seed)
    msi = simulate_dataset(gt, SimulationSpec(factor=1), [1, 1, 2])
    bands_norm = [normalize_band(b)[0].values for b in msi.bands]
    factors = msi.factors
    config = SolverConfig()
    stack = coarse_upsample_stack(bands_norm, factors)
    spec = SubsampleSpec(config.resolve_n_samples(msi.n_pixels), seed)
    model, _ = estimate_subspace(stack, config.n_components, spec)
    weights = resolution_weights(factors, config.gamma_hr)
    return bands_norm, factors, model, weights, config


def _cmd_verify_bounds(args):
    lemma1 = []
    for rows, cols, factor in ((4, 4, 2), (6, 6, 3), (12, 12, 6)):
        for kappa_scale in (1.0, 0.5, 2.0):
            kappa = kappa_scale * factor**-4
            analytic = operator_deviation_analytic(rows * cols, factor, kappa)
            dense = operator_deviation_dense(rows, cols, factor, kappa)
            lemma1.append(
                {
                    "rows": rows,
                    "cols": cols,
                    "factor": factor,
                    "kappa": kappa,
                    "analytic": analytic,
                    "dense": dense,
                    "abs_error": abs(analytic - dense),
                }
            )
    kappa_grid_ok = True
    for factor in (2, 3, 6):
        grid = np.linspace(0.0, 2.0 * factor**-4, 101)
        q_opt = deviation_quadratic(factor**-4, factor)
        kappa_grid_ok &= bool(np.all(q_opt <= deviation_quadratic(grid, factor) + 1e-18))

    instances = []
    violations = 0
    for seed in range(args.seeds):
        bands, factors, model, weights, config = _tiny_instance(seed)
        z_approx = solve_coefficients(bands, factors, model, weights, config)
        z_star = dense_oracle_solve(bands, factors, model, weights, config)
        report = coefficient_error_bound(factors, model, weights, config, z_star, z_approx)
        holds = report.bound >= report.observed_ratio
        violations += 0 if holds else 1
        instances.append(
            {
                "seed": seed,
                "bound": report.bound,
                "observed_ratio": report.observed_ratio,
                "image_ratio": report.image_ratio,
                "bound_holds": holds,
            }
        )
    payload = {
        "lemma1": lemma1,
        "kappa_optimal_on_grid": kappa_grid_ok,
        "instances": instances,
        "bound_violations": violations,
    }
    _write_json(args.report, payload)
    if violations or not kappa_grid_ok:
        return EXIT_NUMERICAL
    return 0


def _cmd_compare(args):
    msi = read_bundle(args.infile)
    config = _load_config(args)
    result_pl = super_resolve(msi, config)
    result_admm = super_resolve_admm(msi, config)
    diag = result_admm.diagnostics
    payload = {
        "per_pixel_gap": solver_gap(result_pl.x_corrected, result_admm.x_corrected),
        "per_pixel_gap_uncorrected": solver_gap(result_pl.x_svd, result_admm.x_svd),
        "admm_iterations": diag.iterations,
        "admm_converged": diag.converged,
        "timings": {
            "pixel_linear": result_pl.timings,
            "admm": result_admm.timings,
        },
    }
    _write_json(args.report, payload)
    if not diag.converged and not args.allow_nonconverged:
        return EXIT_NUMERICAL
    return 0


def _cmd_bench(args):
    sizes = [int(s) for s in args.sizes.split(",") if s]
    if not sizes:
        raise ValidationError("at least one size required")
    _write_json(args.report, run_bench(sizes, repeats=args.repeats))
    return 0


def _cmd_export_png(args):
    msi = read_bundle(args.infile)
    matches = [b for b in msi.bands if b.name == args.band]
    if not matches:
        raise ValidationError(
            f"band {args.band!r} not in bundle (available: {msi.band_names})"
        )
    export_png(matches[0], args.out, args.stretch)
    return 0


def _cmd_validate(args):
    report = validate(read_bundle(args.infile))
    if report.ok:
        print("ok")
        return 0
    for v in report.violations:
        print(f"violation: {v}", file=sys.stderr)
    return EXIT_VALIDATION


def build_parser():
    parser = argparse.ArgumentParser(
        prog="msisr", description="Multispectral image super-resolution toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="degrade a full-resolution bundle")
    p.add_argument("--gt", required=True)
    p.add_argument("--factor", type=int, default=1)
    p.add_argument("--mode", choices=["block", "aa"], default="block")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--band-factors",
        help="comma-separated per-band native factors (e.g. 1,1,2,2,6,6); default all 1",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("superres", help="super-resolve a bundle")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--solver", choices=["pixel-linear", "admm"], default="pixel-linear")
    p.add_argument("--no-residual-correction", action="store_true")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--dump-svd")
    p.add_argument("--timings")
    p.add_argument("--allow-nonconverged", action="store_true")
    p.set_defaults(fn=_cmd_superres)

    p = sub.add_parser("eval", help="quality metrics of a reconstruction")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--in", dest="infile", help="degraded input bundle (marks SR bands)")
    p.add_argument("--report", required=True)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser(
        "verify-bounds", help="operator-deviation identities and error bounds"
    )
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--report", required=True)
    p.set_defaults(fn=_cmd_verify_bounds)

    p = sub.add_parser("compare", help="pixel-linear vs iterative solver gap")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--allow-nonconverged", action="store_true")
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("bench", help="runtime scaling and kernel benchmarks")
    p.add_argument("--sizes", default="64,128,256,512")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--report", required=True)
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("export-png", help="8-bit grayscale preview of one band")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--band", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stretch", choices=["p2p98", "minmax"], default="p2p98")
    p.set_defaults(fn=_cmd_export_png)

    p = sub.add_parser("validate", help="check bundle invariants")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(fn=_cmd_validate)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BundleIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
