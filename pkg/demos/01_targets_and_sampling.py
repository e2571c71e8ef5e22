"""Built-in targets and dataset sampling.

Every experiment starts from a TargetFunction and a seeded Dataset drawn
from it.  Designs: "grid" (equispaced on [-1, 1], 1D only) and "ball"
(uniform on the unit ball, any dimension).
"""

import numpy as np

from adaptix import targets as tg

# A piecewise-linear 1D target whose kinks cluster near the right edge.
# Its total variation is spread very unevenly, which is what separates
# locally adaptive fits from fixed-bandwidth ones later on.
target = tg.inhomogeneous_1d()
print(f"{target.kind}: dimension {target.dimension}, {target.knots.size} kinks")
print(f"  kink locations: {np.array2string(target.knots, precision=2)}")

data = tg.make_dataset(target, n=32, sigma=0.25, seed=0, design="grid")
print(f"  dataset: n={len(data)}, sigma={data.sigma}, design={data.design}")
clean = target(data.points[:, 0])
print(f"  noise sample std: {np.std(data.responses - clean):.3f}")

# Two 2D targets used by the comparison figures: a ridge function that is
# constant along one direction (a single-index target a shallow network
# represents cheaply) and a smooth two-bump mixture (a classic kernel
# smoother's home turf).
for target in (tg.triangle_ridge_2d(), tg.gaussian_mix_2d()):
    data = tg.make_dataset(target, n=200, sigma=0.1, seed=1, design="ball")
    radii = np.linalg.norm(data.points, axis=1)
    values = target(data.points)
    print(f"{target.kind}: n={len(data)}, max radius {radii.max():.3f}, "
          f"value range [{values.min():.2f}, {values.max():.2f}]")

# Sampling is pure function of (target, n, sigma, seed, design).
a = tg.make_dataset(tg.inhomogeneous_1d(), 16, 0.5, seed=7, design="ball")
b = tg.make_dataset(tg.inhomogeneous_1d(), 16, 0.5, seed=7, design="ball")
assert np.array_equal(a.points, b.points) and np.array_equal(a.responses, b.responses)
print("same seed, same dataset: reproducible by construction")
