import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from irle.image import (
    ImageDecodeError,
    gaussian_filter,
    gaussian_kernel,
    load_image,
    luminance,
    patch_max,
    quantile,
    saturation,
    save_image,
)

unit_floats = st.floats(0.0, 1.0, allow_nan=False)


class TestPngIO:
    def test_grayscale_bytes_scaled(self, tmp_path):
        p = tmp_path / "g.png"
        Image.fromarray(np.array([[0, 128], [255, 64]], dtype=np.uint8), mode="L").save(p)
        img = load_image(p)
        assert img.shape == (2, 2, 1)
        np.testing.assert_array_equal(img[:, :, 0].ravel(), [0.0, 128 / 255, 1.0, 64 / 255])

    def test_rgb_roundtrip_reference_encoder(self, tmp_path, rng):
        data = rng.integers(0, 256, (400, 600, 3), dtype=np.uint8)
        p = tmp_path / "rgb.png"
        Image.fromarray(data, mode="RGB").save(p)
        img = load_image(p)
        assert img.shape == (400, 600, 3)
        np.testing.assert_array_equal(np.round(img * 255).astype(np.uint8), data)

    def test_truncated_file(self, tmp_path):
        p = tmp_path / "t.png"
        Image.fromarray(np.zeros((32, 32, 3), np.uint8) + 7).save(p)
        raw = p.read_bytes()
        p.write_bytes(raw[: len(raw) // 2])
        with pytest.raises(ImageDecodeError):
            load_image(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.png")

    def test_sixteen_bit_rejected(self, tmp_path):
        p = tmp_path / "w.png"
        Image.fromarray(np.full((4, 4), 40000, dtype=np.uint16)).save(p)
        with pytest.raises(ImageDecodeError):
            load_image(p)

    def test_save_load_quantization_bound(self, tmp_path, rng):
        img = rng.random((17, 23, 3))
        p = tmp_path / "r.png"
        save_image(img, p)
        assert np.max(np.abs(load_image(p) - img)) <= 1 / 510 + 1e-12

    def test_save_clips(self, tmp_path):
        p = tmp_path / "c.png"
        save_image(np.array([[1.0, -0.1, 1.7]]), p)
        assert np.asarray(Image.open(p)).tolist() == [[255, 0, 255]]


class TestLuminance:
    def test_white_and_red(self):
        assert luminance(np.ones((1, 1, 3)))[0, 0] == pytest.approx(1.0, abs=1e-15)
        assert luminance(np.array([[[1.0, 0.0, 0.0]]]))[0, 0] == pytest.approx(0.299)

    def test_matches_per_pixel_formula(self, rng):
        img = rng.random((9, 7, 3))
        y = luminance(img)
        for i in range(9):
            for j in range(7):
                r, g, b = img[i, j]
                assert y[i, j] == pytest.approx(0.299 * r + 0.587 * g + 0.114 * b, abs=1e-15)

    def test_single_channel_passthrough(self, rng):
        img = rng.random((5, 5, 1))
        np.testing.assert_array_equal(luminance(img), img[:, :, 0])

    @given(arrays(np.float64, (4, 5, 3), elements=unit_floats), st.floats(0.0, 1.0))
    def test_linear(self, img, a):
        np.testing.assert_allclose(luminance(a * img), a * luminance(img), atol=1e-15)


class TestQuantile:
    def test_extremes(self):
        s = np.array([0.3, 0.1, 0.5, 0.2, 0.4])
        assert quantile(s, 0) == 0.1
        assert quantile(s, 1) == 0.5

    def test_lower_quantile_no_interpolation(self):
        assert quantile(np.array([0.4, 0.1, 0.3, 0.2]), 0.5) == 0.2

    def test_q_out_of_range(self):
        with pytest.raises(ValueError):
            quantile(np.array([0.1]), 1.5)

    @given(arrays(np.float64, st.integers(1, 40), elements=unit_floats), st.floats(0, 1), st.floats(0, 1))
    def test_monotone_and_sort_oracle(self, values, q1, q2):
        lo, hi = sorted((q1, q2))
        assert quantile(values, lo) <= quantile(values, hi)
        ordered = sorted(values.tolist())
        assert quantile(values, q1) == ordered[math.floor(q1 * (len(ordered) - 1))]


class TestPatchMax:
    def test_constant(self):
        np.testing.assert_array_equal(patch_max(np.full((6, 5, 3), 0.3), 4), np.full((6, 5), 0.3))

    def test_patch_one_is_channel_max(self, rng):
        img = rng.random((6, 5, 3))
        np.testing.assert_array_equal(patch_max(img, 1), img.max(axis=2))

    def test_bright_pixel_fills_its_tile(self):
        img = np.full((8, 8, 3), 0.1)
        img[1, 2, 1] = 0.9
        out = patch_max(img, 4)
        expected = np.full((8, 8), 0.1)
        expected[:4, :4] = 0.9
        np.testing.assert_array_equal(out, expected)

    def test_exhaustive_tile_scan_ragged(self, rng):
        img = rng.random((11, 13, 3))
        p = 4
        out = patch_max(img, p)
        for i in range(11):
            for j in range(13):
                ti, tj = (i // p) * p, (j // p) * p
                assert out[i, j] == img[ti : ti + p, tj : tj + p].max()

    def test_dominates_luminance(self, rng):
        img = rng.random((10, 10, 3))
        pm = patch_max(img, 3)
        assert np.all(pm >= img.max(axis=2))
        assert np.all(img.max(axis=2) >= luminance(img) - 1e-15)


class TestGaussian:
    def test_kernel_radius_and_sum(self):
        k = gaussian_kernel(2.3)
        assert k.size == 2 * math.ceil(4 * 2.3) + 1
        assert k.sum() == pytest.approx(1.0, abs=1e-15)

    def test_constant_preserved_exactly(self):
        m = np.full((20, 30), 0.37)
        np.testing.assert_array_equal(gaussian_filter(m, 3.0), m)

    def test_impulse_matches_analytic_gaussian(self):
        n, sigma = 65, 3.0
        m = np.zeros((n, n))
        m[32, 32] = 1.0
        out = gaussian_filter(m, sigma)
        r = math.ceil(4 * sigma)
        z = sum(math.exp(-0.5 * (t / sigma) ** 2) for t in range(-r, r + 1))
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                analytic = math.exp(-(dx * dx + dy * dy) / (2 * sigma**2)) / z**2
                assert abs(out[32 + dy, 32 + dx] - analytic) < 1e-6
        assert np.all(out[:32 - r - 1] == 0)

    def test_mean_preserved_interior(self, rng):
        m = np.zeros((128, 128))
        m[40:90, 40:90] = rng.random((50, 50))
        assert gaussian_filter(m, 2.0).mean() == pytest.approx(m.mean(), abs=1e-4)

    @settings(max_examples=30)
    @given(arrays(np.float64, (9, 11), elements=unit_floats), st.floats(0.3, 6.0))
    def test_range_bound(self, m, sigma):
        out = gaussian_filter(m, sigma)
        assert out.min() >= m.min() and out.max() <= m.max()

    def test_edge_replication_against_padded_oracle(self, rng):
        m = rng.random((12, 9))
        sigma = 1.5
        k = gaussian_kernel(sigma)
        r = k.size // 2
        padded = np.pad(m, r, mode="edge")
        k2 = np.outer(k, k)
        out = gaussian_filter(m, sigma)
        for i in (0, 5, 11):
            for j in (0, 4, 8):
                expected = np.sum(padded[i : i + 2 * r + 1, j : j + 2 * r + 1] * k2)
                assert out[i, j] == pytest.approx(expected, abs=1e-12)


class TestSaturation:
    def test_values(self):
        assert saturation(np.array([[[0.4, 0.4, 0.4]]]))[0, 0] == 0
        assert saturation(np.array([[[1.0, 0.0, 0.0]]]))[0, 0] == 1

    def test_per_pixel(self, rng):
        img = rng.random((6, 4, 3))
        s = saturation(img)
        for i in range(6):
            for j in range(4):
                assert s[i, j] == max(img[i, j]) - min(img[i, j])
