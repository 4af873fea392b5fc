import numpy as np
import pytest

from oracles import block_samples_loop, mwc_alias_rhs, rd_samples_loop, rd_tone_integral
from subnyquist.exceptions import InvalidParameter
from subnyquist.samplers import (BlockSamplerConfig, MwcConfig, RdConfig, block_convolve,
                                 block_sample, mwc_sample, mwc_sample_multitone,
                                 mwc_single_channel_config, mwc_single_channel_sample,
                                 rd_output_spectrum, rd_sample_analytic, rd_sample_filtered,
                                 rd_sample_grid)
from subnyquist.signals import (BlockSparseSignal, ChippingSequence, MultitoneSignal,
                                gen_block_sparse, gen_multiband, gen_multitone, multitone_grid,
                                slice_bands)


def rel(a, b):
    return np.linalg.norm(np.asarray(a) - b) / np.linalg.norm(b)


class TestConfigs:
    def test_rd_invariants(self):
        with pytest.raises(InvalidParameter, match="even"):
            RdConfig.random(1.0, 63, 7)
        with pytest.raises(InvalidParameter, match="mod"):
            RdConfig.random(1.0, 64, 6)
        with pytest.raises(InvalidParameter, match="M < N"):
            RdConfig.random(1.0, 64, 64)
        cfg = RdConfig.random(1.0, 64, 64, allow_full_rate=True)
        assert cfg.chips_per_sample == 1
        cfg = RdConfig.random(2.0, 32, 8, seed=3)
        assert (cfg.N, cfg.chips_per_sample, cfg.Ts) == (64, 8, 0.25)

    def test_mwc_invariants(self):
        with pytest.raises(InvalidParameter, match="M' <= L'"):
            MwcConfig.random(500, 10, 20, 5)
        with pytest.raises(InvalidParameter, match="q' < M'"):
            MwcConfig.random(500, 50, 20, 25)
        cfg = MwcConfig.random(500, 50, 20, 25, require_sub_nyquist=False)
        assert cfg.Phi.shape == (25, 50)
        cfg = MwcConfig.random(500, 50, 20, 10, seed=2)
        assert cfg.Tp == pytest.approx(0.1) and cfg.Ts == pytest.approx(0.04)
        assert cfg.fp == 10 and cfg.fs == 25 and cfg.average_rate == 250
        assert np.array_equal(cfg.subset(4).chips, cfg.chips[:4])

    def test_chip_rows_use_channel_streams(self):
        a = MwcConfig.random(500, 50, 20, 10, seed=(1, 2, 1))
        b = MwcConfig.random(500, 50, 20, 15, seed=(1, 2, 1))
        np.testing.assert_array_equal(a.chips, b.chips[:10])

    def test_block_invariants(self):
        with pytest.raises(InvalidParameter):
            BlockSamplerConfig(1.0, 10, 40, 8, np.ones((8, 9)))
        cfg = BlockSamplerConfig.random(1.0, 10, 40, 8, seed=1)
        assert cfg.D == 40 and cfg.sample_rate == 400 and cfg.segment_length == 0.1


class TestRd:
    def test_dc_input(self):
        cfg = RdConfig.random(1.0, 32, 4, seed=3)
        y = rd_sample_analytic(MultitoneSignal(1.0, 32, [0], [1.0]), cfg)
        expect = cfg.chips.values.reshape(4, 8).sum(axis=1) / 32
        np.testing.assert_allclose(y, expect, atol=1e-15)

    def test_unit_chips_single_tone(self):
        T, W, M, n = 1.0, 32, 4, 5
        cfg = RdConfig(T, W, M, ChippingSequence(np.ones(32), W))
        y = rd_sample_analytic(MultitoneSignal(T, W, [n], [1.0]), cfg)
        expect = [rd_tone_integral(n, T, k * T / M, (k + 1) * T / M) for k in range(M)]
        np.testing.assert_allclose(y, expect, atol=1e-15)

    def test_matches_loop_oracle(self):
        cfg = RdConfig.random(1.0, 64, 8, seed=2)
        sig = gen_multitone(5, 1.0, 64, 4)
        ref = rd_samples_loop(cfg.chips.values, sig.support, sig.coeffs, 1.0, 8)
        assert rel(rd_sample_analytic(sig, cfg), ref) < 1e-12

    def test_matches_grid_at_R64(self):
        cfg = RdConfig.random(1.0, 64, 8, seed=1)
        sig = gen_multitone(1, 1.0, 64, 4)
        ya = rd_sample_analytic(sig, cfg)
        assert rel(rd_sample_grid(multitone_grid(sig, 64), cfg, 64), ya) < 1e-4

    def test_mismatch_rejected(self):
        cfg = RdConfig.random(1.0, 64, 8)
        with pytest.raises(InvalidParameter):
            rd_sample_analytic(gen_multitone(1, 2.0, 32, 2), cfg)

    def test_zero_input(self):
        cfg = RdConfig.random(1.0, 16, 4)
        assert np.all(rd_sample_grid(np.zeros(16 * 8 + 1), cfg, 8) == 0)

    def test_grid_checks(self):
        cfg = RdConfig.random(1.0, 16, 4)
        with pytest.raises(InvalidParameter):
            rd_sample_grid(np.zeros(16 * 1 + 1), cfg, 1)
        with pytest.raises(InvalidParameter):
            rd_sample_grid(np.zeros(100), cfg, 8)
        with pytest.raises(InvalidParameter):
            rd_sample_grid(np.zeros(16 * 3 + 1), cfg, 3)  # Simpson needs even R

    @pytest.mark.parametrize("rule", ["simpson", "trapezoid"])
    def test_convergence_monotone(self, rule):
        cfg = RdConfig.random(1.0, 64, 8, seed=4)
        sig = gen_multitone(6, 1.0, 64, 4)
        ya = rd_sample_analytic(sig, cfg)
        errs = [rel(rd_sample_grid(multitone_grid(sig, R), cfg, R, rule), ya)
                for R in (8, 16, 32, 64)]
        assert all(b < a for a, b in zip(errs, errs[1:]))

    def test_filtered_form_equals_grid(self):
        cfg = RdConfig.random(1.0, 32, 8, seed=5)
        g = multitone_grid(gen_multitone(2, 1.0, 32, 3), 8)
        np.testing.assert_allclose(rd_sample_filtered(g, cfg, 8), rd_sample_grid(g, cfg, 8),
                                   rtol=0, atol=1e-15)

    def test_output_spectrum_identity(self):
        cfg = RdConfig.random(1.0, 64, 8, seed=6)
        sig = gen_multitone(3, 1.0, 64, 4)
        Y = np.fft.fft(rd_sample_analytic(sig, cfg))
        assert rel(rd_output_spectrum(sig, cfg, n_alias=2000), Y) < 1e-3
        e = [rel(rd_output_spectrum(sig, cfg, n_alias=a), Y) for a in (50, 200, 800)]
        assert e[0] > e[1] > e[2]


class TestMwc:
    def test_zero_input(self):
        cfg = MwcConfig.random(500, 50, 20, 5, seed=1)
        assert np.all(mwc_sample(np.zeros(8 * 500), cfg, 8) == 0)

    def test_transparent_baseband_channel(self):
        # a band inside the pass band and a constant chip pattern pass unchanged
        L = 10
        cfg = MwcConfig(500, L, 10, 1, np.ones((1, L)))
        x = gen_multiband([(-2 * np.pi * 20, 2 * np.pi * 20)], None, 500, 1.0, 8, seed=2)
        y = mwc_sample(x, cfg, 8)
        np.testing.assert_allclose(y[0], x.grid[::80], atol=1e-12)

    def test_aliasing_identity(self):
        cfg = MwcConfig.random(500, 50, 20, 25, seed=7, require_sub_nyquist=False)
        x = gen_multiband(slice_bands([-12, 4, 19], 50, 500), None, 500, 1.0, 32, seed=8)
        Y = mwc_sample(x, cfg, 32)
        rhs = mwc_alias_rhs(x.grid, x.rate, cfg.chips, 500, 20, 50, Y.shape[1])
        assert rel(np.fft.fft(Y, axis=1) / Y.shape[1], rhs) < 1e-3

    def test_padded_boundary_agrees_in_interior(self):
        # a centred pulse whose bands keep clear of the slice edges barely
        # reaches the record ends, so both boundary models see the same input
        cfg = MwcConfig.random(500, 50, 20, 4, seed=3)
        bands = [(2 * np.pi * (c - 3), 2 * np.pi * (c + 3)) for c in (-70, 30)]
        x = gen_multiband(bands, None, 500, 2.0, 8, seed=9, mode="pulse")
        a = mwc_sample(x, cfg, 8)
        b = mwc_sample(x, cfg, 8, boundary="padded")
        mid = slice(10, -10)
        assert rel(b[:, mid], a[:, mid]) < 1e-2

    def test_decimation_checks(self):
        cfg = MwcConfig.random(500, 50, 20.5, 5)
        with pytest.raises(InvalidParameter, match="integer"):
            mwc_sample(np.zeros(1000), cfg, 3)
        cfg = MwcConfig.random(500, 50, 20, 5)
        with pytest.raises(InvalidParameter):
            mwc_sample(np.zeros(1000), cfg, 8, boundary="nope")

    def test_multitone_analytic_matches_grid(self):
        L, N = 20, 8
        W = L * N
        cfg = MwcConfig.random(W, L, L, 12, seed=2)
        sig = gen_multitone(4, N * L / W, W, 2)
        Ya = mwc_sample_multitone(sig, cfg)
        Yg = mwc_sample(multitone_grid(sig, 32, endpoint=False), cfg, 32)
        assert Ya.shape == (12, N)
        assert np.abs(Ya - Yg).max() / np.abs(Ya).max() < 1e-3

    def test_multitone_requires_square(self):
        cfg = MwcConfig.random(160, 20, 10, 5)
        with pytest.raises(InvalidParameter):
            mwc_sample_multitone(gen_multitone(1, 1.0, 160, 2), cfg)


class TestSingleChannel:
    def setup_method(self):
        self.x = gen_multiband(slice_bands([2, -6], 50, 500), None, 500, 1.0, 16, seed=4)

    def test_identity_for_one_channel(self):
        cfg = MwcConfig.random(500, 50, 20, 1, seed=3)
        np.testing.assert_array_equal(mwc_single_channel_sample(self.x, cfg, 16),
                                      mwc_sample(self.x, cfg, 16)[0])

    def test_zero_input(self):
        cfg = MwcConfig.random(500, 50, 20, 5, seed=3)
        assert np.all(mwc_single_channel_sample(np.zeros(16 * 500), cfg, 16) == 0)

    def test_rate_audit(self):
        cfg = MwcConfig.random(500, 50, 20, 5, seed=3)
        one = mwc_single_channel_config(cfg)
        assert one.fs == pytest.approx(cfg.q_prime * cfg.fs)
        assert one.fp == pytest.approx(cfg.q_prime * cfg.fp)
        assert one.M_prime <= one.L_prime
        y = mwc_single_channel_sample(self.x, cfg, 16)
        assert y.size == mwc_sample(self.x, cfg, 16).size == 125

    def test_needs_divisor(self):
        with pytest.raises(InvalidParameter):
            mwc_single_channel_config(MwcConfig.random(500, 50, 20, 3, seed=3))


class TestBlock:
    def test_single_segment_is_pure_sampling(self):
        x = gen_block_sparse([(0.2, 0.6)], 1.0, 4000.0, seed=1)
        cfg = BlockSamplerConfig(1.0, 1, 40, 1, np.ones((1, 1)))
        np.testing.assert_array_equal(block_sample(x, cfg)[0], x.grid[::100])

    def test_zero_input(self):
        x = BlockSparseSignal(1.0, (), np.zeros(8000), 8000.0)
        cfg = BlockSamplerConfig.random(1.0, 10, 40, 8, seed=1)
        assert np.all(block_sample(x, cfg) == 0)

    def test_paper_config_matches_loop(self):
        x = gen_block_sparse([(0.12, 0.18), (0.43, 0.49), (0.71, 0.79)], 1.0, 8000.0,
                             "bumps", seed=1)
        cfg = BlockSamplerConfig.random(1.0, 10, 40, 8, seed=2)
        Y = block_sample(x, cfg)
        ref = block_samples_loop(x.grid, x.rate, cfg.chips, 1.0, 10, 40)
        assert Y.shape == (8, 40)
        assert np.abs(Y - ref).max() < 1e-10

    def test_samples_lie_on_convolution(self):
        x = gen_block_sparse([(0.1, 0.2), (0.55, 0.6)], 1.0, 8000.0, seed=1)
        cfg = BlockSamplerConfig.random(1.0, 10, 40, 8, seed=1)
        g = block_convolve(x, cfg)
        s = 9 * 800 + 20 * np.arange(40)
        np.testing.assert_allclose(block_sample(x, cfg), g[:, s], atol=1e-14)

    def test_misaligned_grid(self):
        x = gen_block_sparse([(0.1, 0.2)], 1.0, 1010.0, seed=1)
        with pytest.raises(InvalidParameter):
            block_sample(x, BlockSamplerConfig.random(1.0, 10, 40, 8))
