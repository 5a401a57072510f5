import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import make_scene
from msisr.errors import ValidationError
from msisr.image import Band, MultispectralImage
from msisr.metrics import MetricsReport, evaluate_reconstruction, nrmse, ssim


class TestNrmse:
    def test_zero_at_identity(self):
        x = np.arange(12.0).reshape(3, 4) + 1
        assert nrmse(x, x) == 0.0

    def test_hand_value(self):
        assert nrmse([0.0, 3.0, 4.0], [0.0, 3.0, 9.0]) == pytest.approx(1.0)

    def test_homogeneity(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(6, 6)) + 3
        assert nrmse(x, 1.1 * x) == pytest.approx(0.1, abs=1e-12)

    @given(st.integers(0, 10_000), st.floats(0.01, 0.5))
    @settings(max_examples=25, deadline=None)
    def test_homogeneity_property(self, seed, eps):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(5, 5)) + 2.0
        assert nrmse(x, (1 + eps) * x) == pytest.approx(eps, rel=1e-9)

    def test_zero_reference_rejected(self):
        with pytest.raises(ValidationError):
            nrmse(np.zeros((3, 3)), np.ones((3, 3)))


class TestSsim:
    def test_identity_is_one(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(16, 16))
        assert ssim(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_constant_shift_closed_form(self):
        # variances vanish, so only the luminance factor remains:
        # (2*0.5*0.6 + C1) * C2 / ((0.25 + 0.36 + C1) * C2) with R = 1
        val = ssim(np.full((9, 9), 0.5), np.full((9, 9), 0.6), data_range=1.0)
        closed = (2 * 0.5 * 0.6 + 1e-4) / (0.25 + 0.36 + 1e-4)
        assert val == pytest.approx(closed, abs=1e-9)
        assert val == pytest.approx(0.9836092443861662, abs=1e-9)

    def test_plus_minus_one_checkerboards(self):
        # the window means flip sign along with the covariance, so the two
        # negatives cancel and the score is positive; value frozen from the
        # scikit-image implementation
        cb = np.indices((8, 8)).sum(0) % 2 * 2.0 - 1.0
        assert ssim(cb, -cb) == pytest.approx(0.34993201920200806, abs=1e-9)

    def test_anticorrelated_texture_around_common_mean_is_negative(self):
        cb = np.indices((8, 8)).sum(0) % 2 * 2.0 - 1.0
        assert ssim(5.0 + cb, 5.0 - cb) < 0.0

    def test_matches_skimage_reference(self):
        skimage_metrics = pytest.importorskip("skimage.metrics")
        rng = np.random.default_rng(2)
        for _ in range(3):
            x = rng.normal(size=(20, 23))
            y = x + 0.4 * rng.normal(size=x.shape)
            ref = skimage_metrics.structural_similarity(
                x, y, win_size=7, data_range=float(x.max() - x.min())
            )
            assert ssim(x, y) == pytest.approx(ref, abs=1e-10)

    def test_bounded(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            x = rng.normal(size=(10, 10))
            y = rng.normal(size=(10, 10))
            assert -1.0 <= ssim(x, y) <= 1.0

    def test_too_small_image_rejected(self):
        with pytest.raises(ValidationError):
            ssim(np.ones((6, 9)), np.ones((6, 9)))


class TestEvaluateReconstruction:
    def _pair(self):
        gt, msi, _ = make_scene(0, rows=16, cols=16, band_factors=(1, 1, 2))
        return gt, msi

    def test_perfect_reconstruction(self):
        gt, msi = self._pair()
        report = evaluate_reconstruction(gt, gt, msi.factors)
        assert all(b.nrmse == 0.0 for b in report.bands)
        assert all(b.ssim == pytest.approx(1.0, abs=1e-12) for b in report.bands)
        assert report.mean_nrmse_sr == 0.0

    def test_sr_mean_restricted_to_low_res_bands(self):
        gt, msi = self._pair()
        noisy_bands = []
        rng = np.random.default_rng(4)
        for i, b in enumerate(gt.bands):
            values = b.values + (0.05 if msi.factors[i] > 1 else 0.0) * rng.normal(
                size=b.values.shape
            )
            noisy_bands.append(Band(values, 1, b.name))
        pred = MultispectralImage(tuple(noisy_bands), 16, 16)
        report = evaluate_reconstruction(gt, pred, msi.factors)
        sr = [b for b in report.bands if b.source_factor > 1]
        assert report.mean_nrmse_sr == pytest.approx(np.mean([b.nrmse for b in sr]))

    def test_round_trips_through_json(self):
        gt, msi = self._pair()
        report = evaluate_reconstruction(gt, gt, msi.factors, timings={"total": 0.5})
        back = MetricsReport.from_json(report.to_json())
        assert back.to_json_dict() == report.to_json_dict()

    def test_band_count_mismatch_rejected(self):
        gt, _ = self._pair()
        pred = MultispectralImage(gt.bands[:2], 16, 16)
        with pytest.raises(ValidationError):
            evaluate_reconstruction(gt, pred)
