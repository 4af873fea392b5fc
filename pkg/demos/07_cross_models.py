# Each sampler on the other's signal model: the converter on a multitone
# signal, and the random demodulator on a multiband spectrum.

import numpy as np

from subnyquist import (MultitoneSignal, MwcConfig, RdConfig, build_mwc_multitone_mmv,
                        build_mwc_multitone_smv, build_rd_multiband_smv, mmv_column_as_smv,
                        multitone_from_mmv, mwc_sample_multitone, rd_sample_grid, somp)

# converter on tones: L' = M' and the record spans N chip periods
L, N, q = 20, 8, 12
W = L * N
T = N * L / W
sig = MultitoneSignal(T, W, [-37, 52], [1.0, 0.5 - 0.5j])
cfg = MwcConfig.random(W, L, L, q, seed=(5, 0, 1))
system = build_mwc_multitone_mmv(mwc_sample_multitone(sig, cfg), cfg)
est = multitone_from_mmv(somp(system.A, system.Y, 2), system, T, W)
print("tones", sig.support.tolist(), "-> recovered", est.support.tolist())
print("coefficient error", np.abs(est.coeffs - sig.coeffs).max())

# with a single harmonic per block the problem is one measurement vector
cfg1 = MwcConfig.random(L, L, L, q, seed=(5, 1, 1))
Y = mwc_sample_multitone(MultitoneSignal(1.0, L, [3, -5], [1.0, 0.5j]), cfg1)
smv = build_mwc_multitone_smv(Y, cfg1)
print("N=1 system", smv.shape, "matches the general builder:",
      np.allclose(smv.A, mmv_column_as_smv(build_mwc_multitone_mmv(Y, cfg1), 0).A))

# demodulator on bands: a midpoint rule over D frequency cells
Wp, Tobs, R = 500.0, 0.2, 64
rd = RdConfig.random(Tobs, Wp, 10, seed=(5, 2, 1))
d = 2 * np.pi * Wp / 256
bands = [(-np.pi * Wp + 40 * d, -np.pi * Wp + 61 * d)]
tc = 0.09


def pulse(t):
    # every frequency in the band with unit weight, centred at tc
    u = t - tc
    us = np.where(u == 0, 1, u)
    a, b = bands[0]
    return np.where(u == 0, (b - a) / (2 * np.pi),
                    (np.exp(1j * b * us) - np.exp(1j * a * us)) / (2j * np.pi * us))


t = np.arange(rd.N * R + 1) / (R * Wp)
y = rd_sample_grid(pulse(t), rd, R)
for D in (256, 512, 1024):
    s = build_rd_multiband_smv(y, rd, D)
    a, b = bands[0]
    X = np.where((s.index_map >= a) & (s.index_map < b), np.exp(-1j * s.index_map * tc), 0)
    print(f"D={D:4d}: model mismatch {np.linalg.norm(s.A @ X - y) / np.linalg.norm(y):.1e}")
