# How many converter channels are needed?  Three occupied slices out of 50;
# the error collapses once there are enough channels to pin the support.

from subnyquist.experiments import ChannelSweepConfig, exp_channel_sweep

cfg = ChannelSweepConfig(q_values=(6, 10, 14, 18, 20, 22, 25, 30), trials=20)
print(f"{'channels':>8} {'mean error':>11} {'median':>9} {'support ok':>10}")
for rec in exp_channel_sweep(cfg):
    print(f"{rec.sweep_value:8.0f} {rec.mean:11.2e} {rec.p50:9.2e} {rec.success_rate:10.0%}")

# the mean follows the failure rate: a successful trial sits at the floor set
# by the finite record, so a single miss dominates the average
