import numpy as np
import pytest

from helpers import make_tiny_problem
from msisr.admm import (
    AdmmConfig,
    dense_downsample_matrix,
    dense_gram_matrix,
    dense_oracle_solve,
    exact_loss,
    normal_equation_residual,
    run_admm,
    x_step,
    z_step,
)
from msisr.errors import NumericalError
from msisr.resample import BlockAverageOp, block_average
from msisr.solver import SolverConfig, resolution_weights, solve_coefficients, synthesize
from msisr.subspace import SubspaceModel


def _oracle_pair(prob):
    z_star = dense_oracle_solve(
        prob["bands"], prob["factors"], prob["model"], prob["weights"], prob["config"]
    )
    z_pl = solve_coefficients(
        prob["bands"], prob["factors"], prob["model"], prob["weights"], prob["config"]
    )
    return z_star, z_pl


class TestXStep:
    def test_full_resolution_band_scalar_identity(self):
        rng = np.random.default_rng(0)
        y = rng.normal(size=(4, 4))
        target_img = rng.normal(size=(4, 4))
        model = SubspaceModel(np.zeros(1), np.eye(1), np.ones(1))
        w = resolution_weights([1], 0.99)
        rho, sigma = 100.0, 0.02
        x = x_step([y], [1], target_img.reshape(-1, 1), w, sigma, rho)
        c = rho * sigma**2 / (1 * 0.99 * 1)
        expected = (y.reshape(-1) + c * target_img.reshape(-1)) / (1.0 + c)
        assert np.allclose(x[:, 0], expected, atol=1e-12)

    def test_large_rho_pins_x_to_target(self):
        rng = np.random.default_rng(1)
        y = rng.uniform(0.0, 1.0, size=(4, 4))
        target = rng.uniform(0.0, 1.0, size=(16, 2))
        model_w = resolution_weights([1, 2], 0.99)
        bands = [y, block_average(BlockAverageOp(2, 4, 4), y)]
        x = x_step(bands, [1, 2], target, model_w, 0.02, 1e8)
        assert np.allclose(x, target, atol=1e-4)

    @pytest.mark.parametrize("factor", [2, 3, 6])
    def test_block_inverse_matches_dense_inverse(self, factor):
        rng = np.random.default_rng(factor)
        rows = cols = 2 * factor
        y = rng.normal(size=(rows // factor, cols // factor))
        target = rng.normal(size=(rows * cols, 1))
        w = resolution_weights([1, factor], 0.99)
        # u with gamma for this band; replicate the internal coupling constant
        sigma, rho, n_bands = 0.02, 50.0, 1
        c = rho * sigma**2 / (n_bands * w[factor] * factor**2)
        x = x_step([y], [factor], target, type(w)({factor: w[factor], 1: w[1]}), sigma, rho)
        a_dense = dense_downsample_matrix(rows, cols, factor)
        m = a_dense.T @ a_dense + c * np.eye(rows * cols)
        u = a_dense.T @ y.reshape(-1) + c * target[:, 0]
        expected = np.linalg.solve(m, u)
        assert np.allclose(x[:, 0], expected, atol=1e-12)

    def test_nonpositive_coupling_rejected(self):
        w = resolution_weights([1], 0.99)
        with pytest.raises(NumericalError):
            x_step([np.ones((2, 2))], [1], np.ones((4, 1)), w, 0.0, 1.0)


class TestZStep:
    def _model(self, rng, n_bands=3, k=2, sing=(1.5, 0.6)):
        q, _ = np.linalg.qr(rng.normal(size=(n_bands, k)))
        return SubspaceModel(rng.normal(size=n_bands), q, np.array(sing))

    def test_zero_input_gives_zero(self):
        rng = np.random.default_rng(2)
        model = self._model(rng)
        x = np.tile(model.mean, (10, 1))
        z = z_step(x, np.zeros_like(x), model, 0.5, 10.0)
        assert np.allclose(z, 0.0, atol=1e-12)

    def test_small_lambda_limit_is_projection(self):
        rng = np.random.default_rng(3)
        model = self._model(rng)
        x = rng.normal(size=(10, 3))
        w = rng.normal(size=(10, 3))
        z = z_step(x, w, model, 1e-10, 1.0)
        from msisr.solver import analyze

        assert np.allclose(z, analyze(x + w, model), atol=1e-6)

    def test_scalar_case_hand_formula(self):
        rng = np.random.default_rng(4)
        model = SubspaceModel(np.array([0.3]), np.eye(1), np.array([0.9]))
        x = rng.normal(size=(6, 1))
        w = rng.normal(size=(6, 1))
        rho, lam = 7.0, 0.4
        z = z_step(x, w, model, lam, rho)
        a = 1 * rho / (1 * lam)
        t = (x + w - 0.3)[:, 0]
        expected = a * t / (0.9**-2 + a)
        assert np.allclose(z[:, 0], expected, atol=1e-12)


class TestRunAdmm:
    def test_consistent_representable_data_recovered(self):
        # y_i = A_i (Z0 B^T + mean) S_i exactly; tiny lambda recovers Z0
        rng = np.random.default_rng(5)
        q, _ = np.linalg.qr(rng.normal(size=(3, 2)))
        model = SubspaceModel(rng.normal(size=3), q, np.array([1.0, 0.7]))
        z0 = rng.normal(size=(64, 2))
        stack = synthesize(z0, model)
        factors = [1, 1, 2]
        bands = []
        for i, f in enumerate(factors):
            img = stack[:, i].reshape(8, 8)
            bands.append(block_average(BlockAverageOp(f, 8, 8), img))
        cfg = SolverConfig(reg_weight=1e-10)
        w = resolution_weights(factors, cfg.gamma_hr)
        z, _, diag = run_admm(bands, factors, model, w, cfg)
        assert np.linalg.norm(z - z0) / np.linalg.norm(z0) < 1e-4

    def test_matches_dense_oracle(self):
        prob = make_tiny_problem(6)
        z_star, _ = _oracle_pair(prob)
        z, _, diag = run_admm(
            prob["bands"], prob["factors"], prob["model"], prob["weights"], prob["config"]
        )
        assert diag.converged
        assert np.linalg.norm(z - z_star) / np.linalg.norm(z_star) < 1e-6

    def test_zero_data_converges_immediately(self):
        model = SubspaceModel(np.zeros(2), np.eye(2)[:, :1], np.ones(1))
        bands = [np.zeros((4, 4)), np.zeros((2, 2))]
        cfg = SolverConfig()
        w = resolution_weights([1, 2], cfg.gamma_hr)
        z, _, diag = run_admm(bands, [1, 2], model, w, cfg)
        assert np.allclose(z, 0.0, atol=1e-15)
        assert diag.converged and diag.iterations <= 2

    def test_nonconvergence_flagged_not_silent(self):
        prob = make_tiny_problem(7)
        z, _, diag = run_admm(
            prob["bands"],
            prob["factors"],
            prob["model"],
            prob["weights"],
            prob["config"],
            AdmmConfig(max_iters=2),
        )
        assert not diag.converged
        assert diag.iterations == 2
        assert np.all(np.isfinite(z))

    def test_objective_not_above_pixel_linear(self):
        # the iterative solution minimizes the exact objective, so it can
        # never lose to the approximate closed form
        for seed in range(5):
            prob = make_tiny_problem(seed)
            args = (prob["bands"], prob["factors"], prob["model"], prob["weights"], prob["config"])
            z_admm, _, _ = run_admm(*args)
            z_pl = solve_coefficients(*args)
            assert exact_loss(z_admm, *args) <= exact_loss(z_pl, *args) + 1e-9

    def test_residual_histories_populated(self):
        prob = make_tiny_problem(8)
        _, _, diag = run_admm(
            prob["bands"], prob["factors"], prob["model"], prob["weights"], prob["config"]
        )
        assert len(diag.primal_residuals) == diag.iterations
        assert diag.primal_residuals[-1] < 1e-9


class TestDenseOracle:
    def test_scalar_case_matches_shrinkage_formula(self):
        rng = np.random.default_rng(9)
        y = rng.normal(size=(4, 4))
        s = 0.8
        model = SubspaceModel(np.zeros(1), np.eye(1), np.array([s]))
        cfg = SolverConfig(reg_weight=0.7)
        w = resolution_weights([1], 0.99)
        z = dense_oracle_solve([y], [1], model, w, cfg)
        expected = 0.99 * y.reshape(-1) / (0.99 + 0.7 * cfg.sigma**2 / s**2)
        assert np.allclose(z[:, 0], expected, atol=1e-12)

    def test_oracle_satisfies_normal_equations(self):
        for seed in range(3):
            prob = make_tiny_problem(seed + 20)
            z_star, _ = _oracle_pair(prob)
            resid = normal_equation_residual(
                z_star, prob["bands"], prob["factors"], prob["model"], prob["weights"], prob["config"]
            )
            assert resid < 1e-10

    def test_size_guard(self):
        prob = make_tiny_problem(10)
        big = [np.ones((64, 64)), np.ones((64, 64)), np.ones((32, 32))]
        with pytest.raises(NumericalError, match="guard"):
            dense_oracle_solve(big, [1, 1, 2], prob["model"], prob["weights"], prob["config"])

    def test_dense_gram_matches_operator(self):
        from msisr.resample import gram_apply

        rng = np.random.default_rng(11)
        x = rng.normal(size=(6, 6))
        g = dense_gram_matrix(6, 6, 3)
        op = BlockAverageOp(3, 6, 6)
        assert np.allclose(g @ x.reshape(-1), gram_apply(op, x).reshape(-1), atol=1e-12)
