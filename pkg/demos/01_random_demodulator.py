# Random demodulator: sample a sparse multitone signal at 1/8 of its Nyquist
# rate and recover it with orthogonal matching pursuit.

import numpy as np

from subnyquist import (RdConfig, build_rd_smv, eval_multitone, gen_multitone, omp,
                        rd_sample_analytic, rd_sample_grid, multitone_grid,
                        unweight_and_synthesize_multitone)

T = 1.0      # observation interval (s)
N = 128      # harmonics -N/2 .. N/2-1, so the Nyquist rate is N/T
M = 16       # samples per interval
K = 5        # active tones

sig = gen_multitone((7, 0, 0), T, N / T, K)
rd = RdConfig.random(T, N / T, M, seed=(7, 0, 1))
print("tones at harmonics", sig.support.tolist())
print(f"sampling rate {M / T:.0f} Hz vs Nyquist {N / T:.0f} Hz")

# exact samples: each is a chipped integral of the signal over T/M seconds
y = rd_sample_analytic(sig, rd)

# the same samples by quadrature on a dense grid converge as the grid refines
for R in (8, 16, 32):
    yg = rd_sample_grid(multitone_grid(sig, R), rd, R)
    print(f"  grid R={R:2d}: relative deviation {np.linalg.norm(yg - y) / np.linalg.norm(y):.1e}")

system = build_rd_smv(rd, y)
print("system matrix", system.shape)

res = omp(system.A, system.y, K)
t = np.linspace(0, T, 2001)
est, x_hat = unweight_and_synthesize_multitone(res, system, rd, t)
x = eval_multitone(sig, t)
print("recovered harmonics", sorted(est.support.tolist()))
print(f"relative error {np.linalg.norm(x_hat - x) / np.linalg.norm(x):.1e}")
