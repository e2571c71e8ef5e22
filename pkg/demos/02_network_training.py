"""Shallow ReLU networks: penalties, training, and exact pruning.

The model is f(x) = sum_j v_j relu(w_j . x - b_j) + c . x + c0.  Two
penalties drive everything:

  weight decay   0.5 * sum_j (v_j^2 + |w_j|^2)
  path norm      sum_j |v_j| * |w_j|

Per neuron the map (v, w) -> (v*s, w/s) leaves the function unchanged, and
AM-GM gives weight decay >= path norm with equality at the balanced scale
s = sqrt(|w|/|v|).  So minimizing with weight decay is minimizing the path
norm over functions, which is why the two trainings land on fits of the
same character.
"""

import numpy as np

from adaptix import network as net
from adaptix import targets as tg

rng = np.random.default_rng(0)
k, d = 6, 2
params = net.NetworkParams(
    v=rng.standard_normal(k),
    W=rng.standard_normal((k, d)),
    b=rng.uniform(-1, 1, k),
    c=np.zeros(d),
    c0=0.0,
)
balanced = net.balance(params)
pts = tg.uniform_ball(5, d, rng)
print(f"weight decay {net.weight_decay_penalty(params):.4f} >= "
      f"path norm {net.path_norm(params):.4f}")
print(f"after balance: weight decay {net.weight_decay_penalty(balanced):.6f} == "
      f"path norm {net.path_norm(balanced):.6f}, "
      f"forward drift {np.max(np.abs(net.forward(params, pts) - net.forward(balanced, pts))):.2e}")

# Train on a noisy 1D dataset.  Training runs seeded random restarts of
# monotone gradient descent and returns the best restart, balanced and
# pruned (duplicate neurons merged, dead neurons folded into the affine
# part), plus a report of what happened.
data = tg.make_dataset(tg.inhomogeneous_1d(), n=64, sigma=0.25, seed=3, design="grid")
config = net.TrainConfig(lam=0.05, kind=net.WEIGHT_DECAY, width=32,
                         restarts=3, max_iters=5000, seed=0)
fit, report = net.train(data, config)
print(f"trained: objective {report.final_objective:.4f} after "
      f"{report.iterations} iterations, restarts gave "
      f"{np.array2string(np.asarray(report.restart_objectives), precision=4)}")
print(f"width requested 32, width after pruning {fit.K}")

# The penalized objective can be queried directly, and serialization is a
# plain dict round trip.
print(f"objective recomputed: {net.objective(fit, data, 0.05, net.WEIGHT_DECAY):.4f}")
restored = net.network_from_config(net.network_config(fit))
assert np.array_equal(restored.v, fit.v)
print("config round trip: exact")
