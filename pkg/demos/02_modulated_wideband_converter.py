# Modulated wideband converter: a 500 Hz wide spectrum holding three 10 Hz
# bands, sampled by 10 channels at 25 Hz each (half the Nyquist rate in total).

import numpy as np

from subnyquist import (MwcConfig, avg_squared_error, build_mwc_mmv, gen_multiband,
                        mwc_sample, slice_bands, somp, synthesize_multiband)

W = 500.0    # Nyquist rate (Hz)
L = 50       # chips per period, so slices are W/L = 10 Hz wide
M = 20.0     # per-channel decimation; each channel samples at W/M = 25 Hz
q = 10       # channels
T = 2.0
R = 16       # dense grid points per Nyquist sample

slices = [-17, 4, 21]
x = gen_multiband(slice_bands(slices, L, W), None, W, T, R, seed=(3, 0, 3))
print("occupied slices", slices, f"occupancy {x.occupancy:.0%}")

cfg = MwcConfig.random(W, L, M, q, seed=(3, 0, 1))
print(f"average rate {cfg.average_rate:.0f} Hz vs Nyquist {W:.0f} Hz")

Y = mwc_sample(x, cfg, R)
system = build_mwc_mmv(Y, cfg)
print("measurements", Y.shape, "-> unknown slices", system.shape[1])

# joint support first, then least squares on the active slices
res = somp(system.A, system.Y, len(slices))
print("recovered slices", sorted(system.index_map[res.support].tolist()))

x_hat = synthesize_multiband(res, system, cfg, T, R)
keep = (x.times >= cfg.Tp) & (x.times < T - cfg.Tp)
err = avg_squared_error(x.grid, x_hat, T - 2 * cfg.Tp, W, x.rate, keep)
print(f"average squared error {err:.1e} (signal power "
      f"{avg_squared_error(x.grid, 0 * x_hat, T - 2 * cfg.Tp, W, x.rate, keep):.2f})")
