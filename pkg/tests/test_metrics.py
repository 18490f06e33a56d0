import numpy as np
import pytest

from tenrec import ergas, psnr, ssim
from tenrec.metrics import evaluate_all


class TestPsnr:
    def test_identical_inputs_infinite(self):
        x = np.random.default_rng(0).random((16, 16, 3))
        assert psnr(x, x) == float("inf")

    def test_unit_mse_peak_255(self):
        ref = np.zeros((50, 50))
        x = np.ones((50, 50))
        assert psnr(x, ref, peak=255.0) == pytest.approx(48.130803609, abs=1e-6)

    def test_constant_offset_20db(self):
        ref = np.random.default_rng(1).random((20, 20, 4))
        x = ref + 0.1
        assert psnr(x, ref, peak=1.0) == pytest.approx(20.0, abs=1e-9)

    def test_symmetric(self):
        rng = np.random.default_rng(2)
        a, b = rng.random((12, 12, 2)), rng.random((12, 12, 2))
        assert psnr(a, b) == pytest.approx(psnr(b, a))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            psnr(np.zeros((3, 3)), np.zeros((3, 4)))


class TestSsim:
    def test_identical_inputs_one(self):
        x = np.random.default_rng(3).random((24, 24, 2))
        assert ssim(x, x) == pytest.approx(1.0)

    def test_range(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            a, b = rng.random((20, 20)), rng.random((20, 20))
            value = ssim(a, b)
            assert -1.0 <= value <= 1.0
            assert value < 1.0

    def test_symmetric(self):
        rng = np.random.default_rng(5)
        a, b = rng.random((18, 18, 2)), rng.random((18, 18, 2))
        assert ssim(a, b) == pytest.approx(ssim(b, a))

    def test_small_slices_supported(self):
        rng = np.random.default_rng(6)
        a = rng.random((7, 7))
        assert ssim(a, a) == pytest.approx(1.0)

    def test_degrades_with_noise(self):
        rng = np.random.default_rng(7)
        ref = rng.random((32, 32))
        light = ssim(ref + 0.01 * rng.standard_normal(ref.shape), ref)
        heavy = ssim(ref + 0.3 * rng.standard_normal(ref.shape), ref)
        assert heavy < light < 1.0


class TestErgas:
    def test_identical_inputs_zero(self):
        x = np.random.default_rng(8).random((10, 10, 5)) + 0.1
        assert ergas(x, x) == 0.0

    def test_single_band_value(self):
        ref = np.full((10, 10), 2.0)
        x = ref + 1.0
        # RMSE 1, band mean 2 -> 100 * sqrt((1/2)^2) = 50
        assert ergas(x, ref) == pytest.approx(50.0)

    def test_ratio_scales_inverse(self):
        rng = np.random.default_rng(9)
        ref = rng.random((8, 8, 3)) + 0.5
        x = ref + 0.05
        assert ergas(x, ref, ratio=4.0) == pytest.approx(ergas(x, ref) / 4.0)

    def test_not_symmetric(self):
        rng = np.random.default_rng(10)
        ref = rng.random((8, 8)) + 0.5
        x = 2.0 * ref
        assert ergas(x, ref) != pytest.approx(ergas(ref, x))

    def test_zero_band_mean_rejected(self):
        with pytest.raises(ValueError):
            ergas(np.ones((4, 4)), np.zeros((4, 4)))


def test_evaluate_all_keys():
    x = np.random.default_rng(11).random((12, 12, 2)) + 0.1
    out = evaluate_all(x, x)
    assert out["psnr"] == float("inf")
    assert out["ssim"] == pytest.approx(1.0)
    assert out["ergas"] == 0.0
