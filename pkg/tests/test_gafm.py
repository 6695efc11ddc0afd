import numpy as np
import pytest

from irle.gafm import (
    ConvParams,
    GafmParams,
    affine_params,
    channel_standardize,
    conv3x3,
    denoise_loss,
    gafm_modulate,
    gafm_modulate_unshuffled,
    gain_aware_block,
    gain_prior,
    load_weights,
    log_gain,
    pixel_shuffle,
    pixel_unshuffle,
    save_weights,
    smoother_adapter,
)


def naive_conv3x3(x, weight, bias):
    cin, h, w = x.shape
    out = np.zeros((weight.shape[0], h, w))
    for o in range(weight.shape[0]):
        for y in range(h):
            for xx in range(w):
                acc = bias[o]
                for i in range(cin):
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            yy = min(max(y + dy, 0), h - 1)
                            xs = min(max(xx + dx, 0), w - 1)
                            acc += weight[o, i, dy + 1, dx + 1] * x[i, yy, xs]
                out[o, y, xx] = acc
    return out


class TestGain:
    def test_prior_values(self):
        np.testing.assert_allclose(gain_prior(np.ones((2, 2))), 1.0, atol=1e-7)
        g = gain_prior(np.zeros((2, 2)), 1e-8)
        assert np.all(np.isfinite(g))
        np.testing.assert_allclose(g, 1e8)

    def test_monotone(self):
        ramp = np.linspace(0, 1, 50)[None, :]
        assert np.all(np.diff(gain_prior(ramp)) < 0)
        assert np.all(np.diff(log_gain(gain_prior(ramp))) < 0)

    def test_log(self):
        np.testing.assert_array_equal(log_gain(np.ones((3, 3))), 0.0)
        np.testing.assert_allclose(log_gain(np.full((2, 2), np.e)), 1.0)
        with pytest.raises(ValueError):
            log_gain(np.zeros((2, 2)))


class TestShuffle:
    def test_identity_factor_one(self, rng):
        t = rng.random((3, 5, 4))
        np.testing.assert_array_equal(pixel_unshuffle(t, 1), t)
        np.testing.assert_array_equal(pixel_shuffle(t, 1), t)

    def test_shapes(self):
        assert pixel_unshuffle(np.zeros((3, 8, 8)), 2).shape == (12, 4, 4)
        assert pixel_shuffle(np.zeros((12, 4, 4)), 2).shape == (3, 8, 8)

    def test_layout(self, rng):
        t = rng.random((2, 6, 4))
        u = pixel_unshuffle(t, 2)
        for c in range(2):
            for i in range(2):
                for j in range(2):
                    np.testing.assert_array_equal(u[c * 4 + i * 2 + j], t[c, i::2, j::2])

    def test_roundtrips(self, rng):
        t = rng.random((3, 8, 12))
        np.testing.assert_array_equal(pixel_shuffle(pixel_unshuffle(t, 2), 2), t)
        s = rng.random((12, 3, 5))
        np.testing.assert_array_equal(pixel_unshuffle(pixel_shuffle(s, 2), 2), s)

    def test_errors(self):
        with pytest.raises(ValueError):
            pixel_unshuffle(np.zeros((1, 5, 4)), 2)
        with pytest.raises(ValueError):
            pixel_shuffle(np.zeros((3, 2, 2)), 2)


class TestAdapter:
    def test_zero(self, rng):
        p = GafmParams.zeros(3, 4)
        np.testing.assert_array_equal(smoother_adapter(rng.random((5, 5)), p), 0.0)

    def test_center_tap_identity(self, rng):
        w = np.zeros((1, 1, 3, 3))
        w[0, 0, 1, 1] = 1.0
        p = GafmParams(w, np.zeros(1), np.zeros((2, 1)), np.zeros(2))
        g = rng.random((6, 7))
        np.testing.assert_array_equal(smoother_adapter(g, p)[0], g)

    def test_constant_input_and_naive_oracle(self, rng):
        p = GafmParams.random(2, 5, seed=3)
        out = smoother_adapter(np.full((6, 6), 0.7), p)
        assert np.allclose(out, out[:, :1, :1])
        g = rng.random((5, 6))
        np.testing.assert_allclose(
            smoother_adapter(g, p), naive_conv3x3(g[None], p.adapter_weight, p.adapter_bias), atol=1e-12
        )

    def test_conv_oracle_multichannel(self, rng):
        c = ConvParams.random(3, seed=4)
        x = rng.random((3, 5, 4))
        np.testing.assert_allclose(conv3x3(x, c.weight, c.bias), naive_conv3x3(x, c.weight, c.bias), atol=1e-12)


class TestModulate:
    def test_zero_params_identity(self, rng):
        f = rng.normal(size=(4, 8, 8))
        out = gafm_modulate(f, rng.random((8, 8)), GafmParams.zeros(4, 6))
        np.testing.assert_array_equal(out, f)

    def test_pure_shift(self, rng):
        p0 = GafmParams.zeros(2, 3)
        bias = np.array([0.0, 0.0, 0.25, -0.5])
        p = GafmParams(p0.adapter_weight, p0.adapter_bias, p0.proj_weight, bias)
        f = rng.random((2, 4, 4))
        out = gafm_modulate(f, rng.random((4, 4)), p)
        np.testing.assert_allclose(out[0], f[0] + 0.25)
        np.testing.assert_allclose(out[1], f[1] - 0.5)

    def test_step_by_step(self, rng):
        p = GafmParams.random(3, 4, seed=9)
        f, g = rng.normal(size=(3, 6, 5)), rng.normal(size=(6, 5))
        hidden = naive_conv3x3(g[None], p.adapter_weight, p.adapter_bias)
        proj = np.zeros((6, 6, 5))
        for o in range(6):
            proj[o] = p.proj_bias[o] + sum(p.proj_weight[o, h] * hidden[h] for h in range(4))
        expected = f * (1 + proj[:3]) + proj[3:]
        np.testing.assert_allclose(gafm_modulate(f, g, p), expected, atol=1e-12)
        gamma, delta = affine_params(g, p)
        np.testing.assert_allclose(gamma, proj[:3], atol=1e-12)
        np.testing.assert_allclose(delta, proj[3:], atol=1e-12)

    def test_channel_mismatch(self, rng):
        with pytest.raises(ValueError):
            gafm_modulate(np.zeros((2, 4, 4)), np.zeros((4, 4)), GafmParams.zeros(3))
        with pytest.raises(ValueError):
            gafm_modulate(np.zeros((3, 4, 4)), np.zeros((4, 5)), GafmParams.zeros(3))

    def test_unshuffled_alignment_pointwise(self, rng):
        # with a pointwise adapter, modulation commutes with the block rearrangement
        w = np.zeros((4, 1, 3, 3))
        w[:, 0, 1, 1] = rng.normal(size=4)
        base = GafmParams.random(3, 4, seed=2)
        p = GafmParams(w, base.adapter_bias, base.proj_weight, base.proj_bias)
        f, g = rng.normal(size=(3, 8, 10)), rng.normal(size=(8, 10))
        aligned = gafm_modulate_unshuffled(f, g, p, 2)
        assert aligned.shape == (12, 4, 5)
        np.testing.assert_allclose(pixel_shuffle(aligned, 2), gafm_modulate(f, g, p), atol=1e-12)

    def test_unshuffled_alignment_spot_values(self, rng):
        p = GafmParams.random(2, 3, seed=5)
        f, g = rng.normal(size=(2, 8, 8)), rng.normal(size=(8, 8))
        aligned = gafm_modulate_unshuffled(f, g, p, 2)
        # sub-lattice (1, 0): rows 1,3,5,7 and cols 0,2,4,6 of the originals
        sub = 1 * 2 + 0
        direct = gafm_modulate(f[:, 1::2, 0::2], g[1::2, 0::2], p)
        np.testing.assert_allclose(aligned[[0 * 4 + sub, 1 * 4 + sub]], direct, atol=1e-12)


class TestBlock:
    def test_zero_branch_identity(self, rng):
        f = rng.normal(size=(3, 9, 9))
        out = gain_aware_block(f, rng.random((9, 9)), GafmParams.zeros(3), ConvParams.zeros(3))
        np.testing.assert_array_equal(out, f)

    def test_shape(self, rng):
        f = rng.normal(size=(4, 7, 5))
        out = gain_aware_block(f, rng.random((7, 5)), GafmParams.random(4, seed=1), ConvParams.random(4, seed=2))
        assert out.shape == f.shape

    def test_standardize(self, rng):
        z = channel_standardize(rng.normal(3, 2, size=(2, 20, 20)))
        np.testing.assert_allclose(z.mean(axis=(1, 2)), 0, atol=1e-12)
        np.testing.assert_allclose(z.std(axis=(1, 2)), 1, atol=1e-5)

    def test_locality_small(self, rng):
        f = rng.normal(size=(2, 8, 8))
        g = rng.normal(size=(8, 8))
        p, c = GafmParams.random(2, 3, seed=6), ConvParams.random(2, seed=7)
        base = gain_aware_block(f, g, p, c)
        g2 = g.copy()
        g2[0, 7] += 0.5
        diff = np.abs(gain_aware_block(f, g2, p, c) - base).max(axis=0)
        ys, xs = np.nonzero(diff)
        assert ys.max() <= 2 and xs.min() >= 5
        assert diff[0, 7] > 0

    def test_denoise_loss(self, rng):
        a = rng.random((3, 4, 4))
        assert denoise_loss(a, a) == 0
        assert denoise_loss(a, a + 0.125) == pytest.approx(0.125)
        b = rng.random((3, 4, 4))
        assert denoise_loss(a, b) == pytest.approx(np.mean([abs(x - y) for x, y in zip(a.ravel(), b.ravel())]))
        with pytest.raises(ValueError):
            denoise_loss(a, b[:, :3])


class TestWeightFile:
    def test_roundtrip(self, tmp_path):
        p, c = GafmParams.random(3, 5, seed=11), ConvParams.random(3, seed=12)
        path = tmp_path / "w.bin"
        save_weights(path, p, c)
        p2, c2 = load_weights(path)
        assert p2.seed == 11
        np.testing.assert_array_equal(p2.adapter_weight, p.adapter_weight.astype(np.float32))
        np.testing.assert_array_equal(p2.proj_bias, p.proj_bias.astype(np.float32))
        np.testing.assert_array_equal(c2.weight, c.weight.astype(np.float32))

    def test_layout_little_endian(self, tmp_path):
        import json
        import struct

        p, c = GafmParams.zeros(1, 1), ConvParams.zeros(1)
        p = GafmParams(np.full((1, 1, 3, 3), 0.5), p.adapter_bias, p.proj_weight, p.proj_bias)
        path = tmp_path / "w.bin"
        save_weights(path, p, c)
        raw = path.read_bytes()
        (hlen,) = struct.unpack("<I", raw[8:12])
        header = json.loads(raw[12 : 12 + hlen])
        assert header["tensors"][0] == {"name": "gafm.adapter_weight", "shape": [1, 1, 3, 3]}
        assert struct.unpack("<f", raw[12 + hlen : 16 + hlen])[0] == 0.5

    def test_bad_file(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"nope")
        with pytest.raises(ValueError):
            load_weights(path)
