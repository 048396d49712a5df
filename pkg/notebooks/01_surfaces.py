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

# # Benchmark surfaces
#
# Three environments ship with the package: a paraboloid, the Townsend
# function and a synthetic crater that stands in for lunar DEM data. Each
# is a `SurfaceGrid` holding two fields on the same grid. `elevation` is the
# terrain the agent drives over, while `target` is what it measures.

# +
import numpy as np

from gppf import build_parabola, build_synthetic_crater, build_townsend
from gppf.surfaces import count_local_extrema, measure, traversal_distance

np.set_printoptions(precision=3, suppress=True)
# -

surfaces = [build_parabola(), build_townsend(), build_townsend(classic=True),
            build_synthetic_crater()]
for s in surfaces:
    n2, n1 = s.shape
    print(f"{s.name:<18} {n1}x{n2} step={s.step:<5g} range={s.target_range:.3f} "
          f"extrema={count_local_extrema(s)} noise_std={s.noise_std:.4f}")

# The default Townsend surface uses an unsquared cosine term. The `classic`
# variant squares it, which gives a target range of about 5.59.
#
# Grid points are flattened with `x1` varying fastest:

parabola = surfaces[0]
print(parabola.positions[:3])
print(parabola.positions[21:24])

# A measurement adds Gaussian noise to the noiseless target. Every call
# draws exactly once from the generator it is given.

rng = np.random.default_rng(0)
k = 220  # grid centre
print(parabola.target[k], [round(measure(parabola, k, rng), 4) for _ in range(3)])

# Traveled distance is the straight 3D segment between two grid points, so
# climbing costs more than moving over flat ground.

# one step east at the centre, then one step east on the steep rim
print(traversal_distance(parabola, 220, 221), traversal_distance(parabola, 439, 440))

# Optional plot of the crater elevation, when matplotlib is installed.

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    crater = surfaces[-1]
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.imshow(crater.elevation.reshape(crater.shape), origin="lower",
              extent=[crater.axis1[0], crater.axis1[-1], crater.axis2[0], crater.axis2[-1]])
    ax.set_title("synthetic crater elevation")
