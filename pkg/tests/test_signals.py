import numpy as np
import pytest

from oracles import multitone_loop
from subnyquist.exceptions import DomainError, InvalidParameter
from subnyquist.signals import (MultitoneSignal, eval_multitone, gen_block_sparse,
                                gen_chipping, gen_multiband, gen_multitone, make_rng,
                                multitone_grid, slice_bands, spectrum, window_signal)


def out_of_band_ratio(sig):
    om, X = spectrum(sig.grid, sig.rate)
    inside = np.zeros(om.size, bool)
    for a, b in sig.bands:
        inside |= (om >= a) & (om < b)
    E = np.abs(X) ** 2
    return E[~inside].sum() / E.sum()


class TestChipping:
    def test_single_entry(self):
        for s in range(20):
            c = gen_chipping(s, 1)
            assert c.values.shape == (1,) and c.values[0] in (-1.0, 1.0)

    def test_deterministic(self):
        a = gen_chipping((3, 4, 5), 257, 10.0)
        b = gen_chipping((3, 4, 5), 257, 10.0)
        np.testing.assert_array_equal(a.values, b.values)
        assert not np.array_equal(a.values, gen_chipping((3, 4, 6), 257).values)

    def test_mean_is_small(self):
        assert abs(gen_chipping(7, 10 ** 5).values.mean()) < 0.02

    def test_zero_length_rejected(self):
        with pytest.raises(InvalidParameter):
            gen_chipping(1, 0)

    def test_waveform_constant_per_chip(self):
        c = gen_chipping(2, 16, chip_rate=4.0)
        for l in range(16):
            t = l / 4.0 + np.linspace(0, 0.2499, 7)
            assert np.all(c.waveform(t) == c.values[l])

    def test_periodic_waveform_repeats(self):
        c = gen_chipping(2, 5, chip_rate=10.0, periodic=True)
        t = np.linspace(0, 0.49, 50)
        np.testing.assert_array_equal(c.waveform(t), c.waveform(t + c.period))

    def test_on_grid_averages_at_edges(self):
        c = gen_chipping(5, 8, periodic=True)
        g = c.on_grid(4)
        np.testing.assert_array_equal(g[1:4], c.values[0])
        assert g[4] == 0.5 * (c.values[0] + c.values[1])
        assert g[0] == 0.5 * (c.values[0] + c.values[-1])

    def test_stream_keys_are_independent(self):
        a = make_rng(1, 0, 1).integers(0, 2, 1000)
        b = make_rng(1, 0, 2).integers(0, 2, 1000)
        assert np.mean(a == b) < 0.6


class TestMultitone:
    def test_dc(self):
        s = MultitoneSignal(1.0, 8, [0], [1.0])
        np.testing.assert_allclose(eval_multitone(s, np.linspace(0, 1, 11)), 1.0)

    def test_cosine(self):
        n = 3
        s = MultitoneSignal(2.0, 16, [n, -n], [0.5, 0.5])
        t = np.linspace(0, 2, 101)
        x = eval_multitone(s, t)
        np.testing.assert_allclose(x.imag, 0, atol=1e-14)
        np.testing.assert_allclose(x.real, np.cos(2 * np.pi * n * t / 2.0), atol=1e-14)

    def test_matches_double_loop(self):
        s = gen_multitone(11, 1.0, 64, 5)
        t = np.linspace(0, 1, 64)
        ref = multitone_loop(s.support, s.coeffs, s.T, t)
        assert np.max(np.abs(eval_multitone(s, t) - ref)) < 1e-12

    def test_domain_error(self):
        s = gen_multitone(1, 1.0, 8, 2)
        with pytest.raises(DomainError):
            eval_multitone(s, [1.5])
        with pytest.raises(DomainError):
            eval_multitone(s, [-0.1])

    def test_invariants(self):
        with pytest.raises(InvalidParameter):
            MultitoneSignal(1.0, 7, [0], [1])  # N odd
        with pytest.raises(InvalidParameter):
            MultitoneSignal(1.0, 8, [4], [1])  # outside [-N/2, N/2-1]
        with pytest.raises(InvalidParameter):
            MultitoneSignal(1.0, 8, [1, 2], [1])
        s = gen_multitone(3, 1.0, 32, 6)
        assert s.K == 6 and s.N == 32
        assert s.support.min() >= -16 and s.support.max() <= 15

    def test_grid_has_endpoint(self):
        s = gen_multitone(3, 2.0, 16, 3)
        g = multitone_grid(s, 4)
        assert g.size == 32 * 4 + 1
        np.testing.assert_allclose(g[-1], g[0], atol=1e-12)  # periodic on [0, T]


class TestMultiband:
    def test_empty_band_list(self):
        s = gen_multiband([], None, 500.0, 1.0, 4, seed=1)
        assert np.all(s.grid == 0)

    @pytest.mark.parametrize("mode", ["noise", "pulse"])
    def test_single_band_confined(self, mode):
        B = 40.0
        s = gen_multiband([(-np.pi * B, np.pi * B)], [1.0], 500.0, 1.0, 8, seed=2, mode=mode)
        assert out_of_band_ratio(s) < 1e-9

    def test_four_band_windowing_instance(self):
        bands = slice_bands([-20, -3, 8, 17], 50, 500.0)
        s = gen_multiband(bands, None, 500.0, 2.0, 8, seed=3)
        assert s.K == 4 and s.grid.size == 8 * 500 * 2
        assert s.occupancy == pytest.approx(4 / 50)
        assert out_of_band_ratio(s) < 1e-9
        assert all(abs(a) <= np.pi * 500 and abs(b) <= np.pi * 500 for a, b in s.bands)

    def test_band_power_scales_with_amplitude(self):
        bands = slice_bands([-5, 10], 50, 500.0)
        s = gen_multiband(bands, [1.0, 3.0], 500.0, 1.0, 8, seed=4)
        om, X = spectrum(s.grid, s.rate)
        E = [np.sum(np.abs(X[(om >= a) & (om < b)]) ** 2) for a, b in s.bands]
        assert E[1] / E[0] == pytest.approx(9.0, rel=1e-9)

    def test_overlap_and_range_rejected(self):
        with pytest.raises(InvalidParameter):
            gen_multiband([(0, 100), (50, 200)], None, 500.0, 1.0, 4)
        with pytest.raises(InvalidParameter):
            gen_multiband([(0, 2 * np.pi * 500)], None, 500.0, 1.0, 4)
        with pytest.raises(InvalidParameter):
            gen_multiband([(0, 100)], None, 500.0, 1.0, 1)

    def test_slice_bands_cover_slices(self):
        fp = 10.0
        (a, b), = slice_bands([3], 50, 500.0)
        assert a == pytest.approx(2 * np.pi * (-3 * fp - fp / 2))
        assert b - a == pytest.approx(2 * np.pi * fp)

    def test_parseval(self):
        s = gen_multiband(slice_bands([2, -9], 50, 500.0), None, 500.0, 1.0, 4, seed=9)
        om, X = spectrum(s.grid, s.rate)
        et = np.sum(np.abs(s.grid) ** 2) / s.rate
        ef = np.sum(np.abs(X) ** 2) * s.rate / s.grid.size
        assert ef == pytest.approx(et, rel=1e-9)


class TestBlockSparse:
    def test_empty(self):
        x = gen_block_sparse([], 1.0, 1000.0)
        assert np.all(x.grid == 0)

    def test_full_interval(self):
        x = gen_block_sparse([(0.0, 1.0)], 1.0, 1000.0, seed=1)
        assert x.occupancy == 1.0
        assert np.all(x.grid[1:-1] > 0)

    @pytest.mark.parametrize("family", ["hann", "smooth", "bumps"])
    def test_three_bumps_confined(self, family):
        ivs = [(0.12, 0.18), (0.43, 0.49), (0.71, 0.79)]
        x = gen_block_sparse(ivs, 1.0, 8000.0, family, seed=1)
        t = x.times
        inside = np.zeros(t.size, bool)
        for a, b in ivs:
            inside |= (t >= a) & (t <= b)
        assert np.max(np.abs(x.grid[~inside]), initial=0) < 1e-9 * np.max(np.abs(x.grid))
        assert x.smoothness == family

    def test_rejects_bad_intervals(self):
        with pytest.raises(InvalidParameter):
            gen_block_sparse([(0.5, 1.2)], 1.0, 1000.0)
        with pytest.raises(InvalidParameter):
            gen_block_sparse([(0.1, 0.3), (0.2, 0.4)], 1.0, 1000.0)
        with pytest.raises(InvalidParameter):
            gen_block_sparse([(0.1, 0.3)], 1.0, 1000.5)

    def test_continuous_at_ends(self):
        x = gen_block_sparse([(0.25, 0.5)], 1.0, 8000.0, "hann", seed=2)
        i0, i1 = 2000, 4000
        assert abs(x.grid[i0]) < 1e-12 and abs(x.grid[i1]) < 1e-12


class TestWindow:
    def setup_method(self):
        self.sig = gen_multiband(slice_bands([1, -4], 50, 500.0), None, 500.0, 2.0, 8, seed=5)

    def test_full_window_is_identity(self):
        w = window_signal(self.sig, 2.0, 0.0)
        np.testing.assert_array_equal(w.grid, self.sig.grid)
        assert w.nominal and w.bands == self.sig.bands

    def test_half_window_contracts(self):
        w = window_signal(self.sig, 1.0, 0.5)
        assert np.sum(np.abs(w.grid) ** 2) <= np.sum(np.abs(self.sig.grid) ** 2)
        t = w.times
        assert np.all(w.grid[(t < 0.5 - 1e-9) | (t >= 1.5)] == 0)

    def test_rejects_bad_windows(self):
        with pytest.raises(InvalidParameter):
            window_signal(self.sig, 0.0)
        with pytest.raises(InvalidParameter):
            window_signal(self.sig, 1.5, 1.0)

    @pytest.mark.parametrize("d", [0.1, 0.2, 0.5])
    def test_mainlobe_width(self, d):
        # a windowed pure tone spreads into sinc(f d): nulls at +-1/d, -3 dB at 0.443/d
        rate, T = 4000.0, 2.0
        t = np.arange(int(rate * T)) / rate
        tone = np.exp(2j * np.pi * 100.0 * t)
        z = np.where((t >= 0.5) & (t < 0.5 + d), tone, 0)
        pad = 64
        Z = np.abs(np.fft.fftshift(np.fft.fft(z, pad * z.size)))
        f = np.fft.fftshift(np.fft.fftfreq(pad * z.size, 1 / rate))
        k = int(np.argmax(Z))
        assert f[k] == pytest.approx(100.0, abs=rate / (pad * z.size))
        right = k + np.argmax(np.diff(Z[k:]) > 0)  # first local minimum
        left = k - np.argmax(np.diff(Z[:k + 1][::-1]) > 0)
        assert f[right] - f[left] == pytest.approx(2 / d, rel=0.02)
        half = Z >= Z[k] / np.sqrt(2)
        lo, hi = k, k
        while half[lo - 1]:
            lo -= 1
        while half[hi + 1]:
            hi += 1
        assert f[hi] - f[lo] == pytest.approx(0.886 / d, rel=0.03)
