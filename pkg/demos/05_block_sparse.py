# Time-sparse signals: three short pulses in one second, sampled through block
# convolution with 8 of 10 channels and recovered segment by segment.

import numpy as np

from subnyquist.experiments import BlockDemoConfig, exp_block_demo

out = exp_block_demo(BlockDemoConfig())
print("active segments ", out["active_segments"])
print("recovered       ", out["support"])
print(f"normalized squared error {out['nse']:.3f}")
print(f"sampling {out['sample_rate_hz']:.0f} Hz against a Nyquist rate of "
      f"{out['nyquist_rate_hz']:.0f} Hz (99.99% energy), "
      f"a {out['rate_reduction']:.1f}x reduction")
print(f"condition number of the segment basis {out['condition_number']:.2f}")

x, x_hat = out["signal"].grid, out["x_hat"]
for a, b in out["signal"].intervals:
    i = (out["signal"].times >= a) & (out["signal"].times < b)
    print(f"  pulse [{a:.2f}, {b:.2f}) s: peak {x[i].max():.3f}, recovered {x_hat[i].max():.3f}")
print(f"largest error outside the pulses {np.abs(x_hat - x)[x == 0].max():.2e}")
