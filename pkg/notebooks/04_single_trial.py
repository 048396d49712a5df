# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: light
#   kernelspec:
#     display_name: Python 3
#     name: python3
# ---

# # One exploration trial
#
# A trial starts at a random grid point and takes ten samples along a short
# random walk. Each later step retrains the GP, predicts over the whole
# grid, lets the policy pick the next point, drives there and measures.

# +
import numpy as np

from gppf import (Policy, TrialConfig, build_parabola, full_report, normalization_for,
                  run_trial, stopping_count)

surface = build_parabola()
n = stopping_count(surface)  # 109
norms = normalization_for(surface, n)
# -

records = {}
for text in ("conventional", "constrained:2"):
    records[text] = run_trial(TrialConfig(surface, Policy.parse(text), n, seed=3))
    r = full_report(records[text], norms)
    print(f"{text:<14} e_n={r.e_n:.4f} i_c={r.i_c:.2f} d_c={r.d_c:.2f} "
          f"(converged at sample {r.convergence_index})")

# Both runs share the same start and initialization walk because they share
# a seed. They diverge after sample 10.

a, b = records["conventional"], records["constrained:2"]
print(np.array_equal(a.waypoints[:10], b.waypoints[:10]), a.waypoints[10:14], b.waypoints[10:14])

# The RMSE trace (against the noiseless target) and the cumulative distance
# trace have one entry per sample.

for name, rec in records.items():
    print(name, np.round(rec.rmse_trace[[9, 30, 60, -1]], 4),
          np.round(rec.cum_distance_trace[[9, 30, 60, -1]], 2))

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    fig, ax = plt.subplots()
    for name, rec in records.items():
        ax.plot(rec.cum_distance_trace, rec.rmse_trace / surface.target_range, label=name)
    ax.set_xlabel("cumulative distance")
    ax.set_ylabel("NRMSE")
    ax.legend()
