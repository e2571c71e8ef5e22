"""2D comparison: shallow ReLU network vs thin-plate spline.

On a ridge target (constant along one direction) the network wins: a few
well-placed neurons capture the single-index structure that an isotropic
kernel smoother must resolve everywhere.  On a smooth radial mixture the
thin-plate spline is at home and the network merely keeps pace.  This demo
runs a reduced version and writes a heat figure; the full-size figures are

    adaptix reproduce --figure fig2 --out out/fig2   (bump mixture)
    adaptix reproduce --figure fig3 --out out/fig3   (triangle ridge)
"""

import pathlib

import numpy as np

from adaptix import experiments as ex
from adaptix import svgfig
from adaptix import targets as tg

where = ex.GridEval(2000, seed=0)
net_est = ex.ReluNetEstimator(width=32, restarts=2, max_iters=8000, init_scale=0.7)

for target, lam_net in ((tg.triangle_ridge_2d(), 1e-3), (tg.gaussian_mix_2d(), 0.1)):
    data = tg.make_dataset(target, n=300, sigma=0.1, seed=0, design="ball")
    lam_tps, _ = ex.select_lambda(
        ex.TpsEstimator(), data, ex.OracleRule(np.geomspace(1e-9, 1e-1, 13)),
        target=target, where=where)
    pred_tps = ex.fit_estimator(ex.TpsEstimator(), data, lam_tps)
    pred_net = ex.fit_estimator(net_est, data, lam_net, seed=0)
    mse_tps = ex.empirical_mse(pred_tps, target, where)
    mse_net = ex.empirical_mse(pred_net, target, where)
    print(f"{target.kind}: net mse {mse_net:.5f} vs tps mse {mse_tps:.5f} "
          f"(ratio {mse_net / mse_tps:.2f})")

    # Render truth / network / thin-plate side by side on a shared scale;
    # cells outside the unit ball stay NaN and are left unpainted.
    axis = np.linspace(-1, 1, 61)
    gx, gy = np.meshgrid(axis, axis)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    inside = np.linalg.norm(pts, axis=1) <= 1.0

    def sheet(values):
        z = np.full(pts.shape[0], np.nan)
        z[inside] = np.asarray(values)[inside]
        return z.reshape(gx.shape)

    panels = [
        svgfig.HeatPanel(title="target", values=sheet(target(pts)),
                         points=data.points, point_values=data.responses),
        svgfig.HeatPanel(title=f"relu network, mse {mse_net:.4f}",
                         values=sheet(pred_net(pts))),
        svgfig.HeatPanel(title=f"thin plate, mse {mse_tps:.4f}",
                         values=sheet(pred_tps(pts))),
    ]
    out = pathlib.Path("out") / "demo05"
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{target.kind}.svg"
    svgfig.write_heat_figure(str(path), panels,
                             meta={"target": target.kind,
                                   "mse": {"net": mse_net, "tps": mse_tps}})
    print(f"  wrote {path}")
