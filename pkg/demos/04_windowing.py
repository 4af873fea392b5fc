# Observation length: a short rectangular window spreads every band into its
# neighbours, which hurts a sub-Nyquist converter far more than a full-rate one.

from subnyquist.experiments import WindowingConfig, exp_windowing

cfg = WindowingConfig(q_values=(20, 50), durations=(2.0, 1.0, 0.5, 0.2, 0.1), trials=10)
recs = exp_windowing(cfg)
for q in cfg.q_values:
    print(f"q' = {q}")
    for rec in recs:
        if rec.group == q:
            print(f"  window {rec.sweep_value:4.1f} s  mean error {rec.mean:.2e}")
