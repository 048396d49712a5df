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

# # A small campaign
#
# A campaign runs every policy over several trials and aggregates the
# convergence metrics. Trial `t` is seeded from `(base_seed, t)`, and all
# policies in a trial share the start point. Three trials of three policies
# take about 20 seconds on one core.

# +
import tempfile
from pathlib import Path

from gppf import CampaignConfig, Policy, SurfaceKind, best_worst, persist, run_campaign

config = CampaignConfig(
    SurfaceKind("parabola"),
    policies=[Policy.parse(p) for p in ("constrained:2", "normalized", "conventional")],
    n_trials=3, base_seed=0)
summaries = run_campaign(config)
# -

print(f"{'policy':<14}" + "".join(f"{m:>10}" for m in ("e_n", "i_c", "d_c", "e_dc")))
for s in summaries:
    print(f"{s.policy:<14}" + "".join(f"{s.mean(m):10.4f}" for m in ("e_n", "i_c", "d_c", "e_dc")))

for metric in ("e_n", "d_c"):
    print(metric, "best/worst:", best_worst(summaries, metric))

# `persist` writes per-trial traces, a summary table, a JSON manifest and
# mean/std curve files. Rerunning with the same config reproduces every
# byte.

out = Path(tempfile.mkdtemp()) / "run"
for path in persist(summaries, config, out)[-6:]:
    print(path.relative_to(out))
print((out / "summary.csv").read_text().splitlines()[0])
