"""Linear smoother baselines: cubic smoothing spline and thin-plate spline.

Both estimators are linear maps from the response vector to the fitted
function for a fixed design, which is exactly what makes them
non-adaptive: one smoothing level applies everywhere.

The cubic smoothing spline minimizes

    sum_n (y_n - f(x_n))^2 + lam * integral f''(x)^2 dx

over C2 functions; the minimizer is a natural cubic spline with knots at
the design points.  Following the banded formulation of Green & Silverman
(1994), the second derivatives gamma at the interior knots solve
(R + lam * Q'Q) gamma = Q'y, a pentadiagonal SPD system, and the fitted
values are y - lam * Q gamma.

The thin-plate spline minimizes the same squared loss plus lam times the
integrated squared second derivatives over the plane.  The minimizer is
f(x) = sum_i a_i phi(|x - x_i|) + affine with phi(r) = r^2 log r, found by
the dense saddle system [[Phi + N*lam*I, P], [P', 0]] [a; poly] = [y; 0];
the side conditions P'a = 0 make the radial part orthogonal to affine
functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .targets import Dataset


def _freeze(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# Cubic smoothing spline


@dataclass(frozen=True)
class CssModel:
    """Natural cubic spline state: knots, fitted values, and second
    derivatives at the knots (zero at both ends)."""

    knots: np.ndarray
    fitted: np.ndarray
    second_derivs: np.ndarray
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "knots", _freeze(self.knots))
        object.__setattr__(self, "fitted", _freeze(self.fitted))
        object.__setattr__(self, "second_derivs", _freeze(self.second_derivs))
        n = self.knots.size
        if self.fitted.shape != (n,) or self.second_derivs.shape != (n,):
            raise ValueError("knots, fitted, second_derivs must share one length")
        if n < 3:
            raise ValueError("need at least 3 knots")
        if not np.all(np.diff(self.knots) > 0):
            raise ValueError("knots must be strictly increasing")
        if self.second_derivs[0] != 0.0 or self.second_derivs[-1] != 0.0:
            raise ValueError("natural boundary requires zero end second derivatives")

    def __call__(self, x):
        return eval_css(self, x)


def fit_css(data: Dataset, lam: float) -> CssModel:
    """Penalized natural-spline fit via the banded interior system."""
    if data.dimension != 1:
        raise ValueError("cubic smoothing spline is defined for 1D data only")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    n = len(data)
    if n < 3:
        raise ValueError("need at least 3 points")
    order = np.argsort(data.x, kind="stable")
    x = data.x[order]
    y = data.responses[order]
    h = np.diff(x)
    if np.any(h == 0.0):
        raise ValueError("design points must be distinct")

    p = 1.0 / h[:-1]  # column weights at the knot below each interior point
    r = 1.0 / h[1:]  # and at the knot above
    m = n - 2
    # R (the spline Gram matrix) plus lam * Q'Q, both banded, upper form
    ab = np.zeros((3, m))
    ab[2] = (h[:-1] + h[1:]) / 3.0 + lam * (p * p + (p + r) ** 2 + r * r)
    if m > 1:
        ab[1, 1:] = h[1:-1] / 6.0 + lam * (-r[:-1] * (p[:-1] + r[:-1]) - r[:-1] * (p[1:] + r[1:]))
    if m > 2:
        ab[0, 2:] = lam * r[:-2] * r[1:-1]
    qty = p * y[:-2] - (p + r) * y[1:-1] + r * y[2:]
    gamma = scipy.linalg.solveh_banded(ab, qty)

    q_gamma = np.zeros(n)
    q_gamma[:-2] += p * gamma
    q_gamma[1:-1] -= (p + r) * gamma
    q_gamma[2:] += r * gamma
    fitted = y - lam * q_gamma
    second = np.zeros(n)
    second[1:-1] = gamma
    return CssModel(knots=x, fitted=fitted, second_derivs=second, lam=float(lam))


def eval_css(model: CssModel, x):
    """Piecewise-cubic evaluation between knots, linear beyond the ends."""
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    pts = np.atleast_1d(xs).astype(float)
    t, f, g = model.knots, model.fitted, model.second_derivs
    n = t.size
    i = np.clip(np.searchsorted(t, pts, side="right") - 1, 0, n - 2)
    h = t[i + 1] - t[i]
    lo = t[i + 1] - pts
    hi = pts - t[i]
    out = (
        g[i] * lo**3 / (6.0 * h)
        + g[i + 1] * hi**3 / (6.0 * h)
        + (f[i] / h - g[i] * h / 6.0) * lo
        + (f[i + 1] / h - g[i + 1] * h / 6.0) * hi
    )
    h0 = t[1] - t[0]
    slope_lo = (f[1] - f[0]) / h0 - h0 * g[1] / 6.0
    h1 = t[-1] - t[-2]
    slope_hi = (f[-1] - f[-2]) / h1 + h1 * g[-2] / 6.0
    left = pts < t[0]
    right = pts > t[-1]
    out = np.where(left, f[0] + slope_lo * (pts - t[0]), out)
    out = np.where(right, f[-1] + slope_hi * (pts - t[-1]), out)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Thin-plate spline


@dataclass(frozen=True)
class TpsModel:
    """Radial-basis coefficients over the design points plus an affine part.

    The side conditions sum(a) = 0 and sum(a_i x_i) = 0 are enforced by the
    saddle solve and re-checked here.
    """

    centers: np.ndarray
    a: np.ndarray
    poly: np.ndarray
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "centers", _freeze(self.centers))
        object.__setattr__(self, "a", _freeze(self.a))
        object.__setattr__(self, "poly", _freeze(self.poly))
        if self.centers.ndim != 2 or self.centers.shape[1] != 2:
            raise ValueError("centers must have shape (n, 2)")
        if self.a.shape != (self.centers.shape[0],) or self.poly.shape != (3,):
            raise ValueError("a must match centers; poly must have length 3")
        scale = max(1.0, float(np.sum(np.abs(self.a))))
        side = np.concatenate([[np.sum(self.a)], self.a @ self.centers])
        if np.max(np.abs(side)) > 1e-8 * scale:
            raise ValueError("side conditions violated: kernel part not orthogonal to affine")

    def __call__(self, x):
        return eval_tps(self, x)


def _phi_from_sq(r2: np.ndarray) -> np.ndarray:
    """phi(r) = r^2 log r = 0.5 * r^2 log(r^2), with phi(0) = 0."""
    out = np.zeros_like(r2)
    pos = r2 > 0.0
    out[pos] = 0.5 * r2[pos] * np.log(r2[pos])
    return out


def _pairwise_sq(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    sq = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * (A @ B.T)
    return np.maximum(sq, 0.0)


def fit_tps(data: Dataset, lam: float) -> TpsModel:
    """Solve the (N+3) saddle system; lam is scaled by N inside the system
    so its meaning is per-sample."""
    if data.dimension != 2:
        raise ValueError("thin-plate spline is defined for 2D data only")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    X = data.points
    y = data.responses
    n = len(data)
    if n < 4:
        raise ValueError("need at least 4 points")
    sq = _pairwise_sq(X, X)
    off = sq[~np.eye(n, dtype=bool)]
    if off.size and np.min(off) == 0.0:
        raise ValueError("design points must be distinct")
    P = np.column_stack([np.ones(n), X])
    sv = np.linalg.svd(P, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise ValueError("design points are collinear; affine part is degenerate")
    K = np.zeros((n + 3, n + 3))
    K[:n, :n] = _phi_from_sq(sq) + n * lam * np.eye(n)
    K[:n, n:] = P
    K[n:, :n] = P.T
    rhs = np.concatenate([y, np.zeros(3)])
    sol = scipy.linalg.solve(K, rhs)
    return TpsModel(centers=X, a=sol[:n], poly=sol[n:], lam=float(lam))


def eval_tps(model: TpsModel, x):
    """sum_i a_i phi(|x - x_i|) + poly . (1, x1, x2)."""
    pts = np.asarray(x, dtype=float)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != 2:
        raise ValueError("points must have shape (n, 2)")
    vals = _phi_from_sq(_pairwise_sq(pts, model.centers)) @ model.a
    vals = vals + model.poly[0] + pts @ model.poly[1:]
    return float(vals[0]) if scalar else vals


# ---------------------------------------------------------------------------
# Serialization


def css_config(model: CssModel) -> dict:
    return {
        "knots": model.knots,
        "fitted": model.fitted,
        "second_derivs": model.second_derivs,
        "lambda": model.lam,
    }


def css_from_config(cfg: dict) -> CssModel:
    return CssModel(
        knots=np.asarray(cfg["knots"], dtype=float),
        fitted=np.asarray(cfg["fitted"], dtype=float),
        second_derivs=np.asarray(cfg["second_derivs"], dtype=float),
        lam=float(cfg["lambda"]),
    )


def tps_config(model: TpsModel) -> dict:
    return {"centers": model.centers, "a": model.a, "poly": model.poly, "lambda": model.lam}


def tps_from_config(cfg: dict) -> TpsModel:
    return TpsModel(
        centers=np.asarray(cfg["centers"], dtype=float),
        a=np.asarray(cfg["a"], dtype=float),
        poly=np.asarray(cfg["poly"], dtype=float),
        lam=float(cfg["lambda"]),
    )
