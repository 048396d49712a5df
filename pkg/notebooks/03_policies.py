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

# # Query policies
#
# All three policies score the unsampled grid points by predictive variance.
#
# * `conventional` takes the global maximum.
# * `normalized` divides by planar distance from the current position.
# * `constrained:<m>` only looks within `m` grid steps, and falls back to
#   the nearest unsampled point when that disc is exhausted.

# +
import numpy as np

from gppf import Policy, SelectionContext, candidate_set, select_next

g1, g2 = np.meshgrid(np.arange(7.0), np.arange(7.0))
positions = np.column_stack([g1.ravel(), g2.ravel()])
current = 24  # centre of the 7 x 7 grid
variances = np.exp(-0.5 * np.sum((positions - [6, 6]) ** 2, axis=1) / 4) + 0.05
unsampled = np.ones(49, dtype=bool)
unsampled[current] = False
ctx = SelectionContext(variances, positions, current, unsampled, step=1.0)
# -

for text in ("conventional", "normalized", "constrained:1", "constrained:2"):
    k = select_next(Policy.parse(text), ctx)
    print(f"{text:<14} -> index {k:2d} at {positions[k]}  "
          f"distance {np.hypot(*(positions[k] - positions[current])):.2f}")

# The unit horizon includes the four axis neighbours only, since the
# diagonals lie at distance sqrt(2).

print(candidate_set(Policy.parse("constrained:1"), ctx))

# When every point inside the horizon is already sampled, the move goes to
# the nearest unsampled point and is flagged as a fallback.

ring = np.hypot(*(positions - positions[current]).T) <= 1.5
ctx2 = SelectionContext(variances, positions, current, unsampled & ~ring, 1.0)
print(select_next(Policy.parse("constrained:1"), ctx2, return_fallback=True))
