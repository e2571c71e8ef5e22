"""Ground-truth test functions on the unit ball and noisy sample generation.

Four target families are provided, all defined on the closed Euclidean
unit ball of their dimension:

* ``PiecewiseLinear1D`` -- continuous piecewise-linear interpolants on
  [-1, 1]; the ``inhomogeneous_1d`` default packs its breakpoints
  quadratically toward -1 so the function oscillates rapidly at one end
  of the interval and slowly at the other.
* ``GaussianMix2D`` -- a superposition of isotropic Gaussian bumps on
  the unit disk (infinitely smooth).
* ``TriangleRidge2D`` -- a ridge function whose profile is a periodic
  triangular wave (continuous, piecewise linear, not twice weakly
  differentiable).
* ``PureRidge`` -- a ridge function with a user-supplied piecewise-linear
  profile, in any dimension up to 16.

``make_dataset`` draws noisy samples ``y = f(x) + eps`` with Gaussian
noise, either on a fixed 1D grid or i.i.d. uniformly on the ball.
Generation is a pure function of ``(target, n, sigma, seed, design)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .jsonio import fmt17

MAX_DIMENSION = 16
_BALL_TOL = 1e-9


def unit(v) -> np.ndarray:
    """Normalize a vector to Euclidean length 1."""
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def _check_direction(w: np.ndarray) -> None:
    if abs(float(np.linalg.norm(w)) - 1.0) > 1e-12:
        raise ValueError("ridge direction must have unit Euclidean norm (within 1e-12)")


def _freeze(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def triangle_wave(t, period: float, amplitude: float) -> np.ndarray:
    """Periodic triangular wave: 0 at t=0, peak +amplitude at t=period/4."""
    s = np.mod(np.asarray(t, dtype=float) / period, 1.0)
    out = np.where(s < 0.25, 4.0 * s, np.where(s < 0.75, 2.0 - 4.0 * s, 4.0 * s - 4.0))
    return amplitude * out


@dataclass(frozen=True)
class PiecewiseLinear1D:
    """Continuous piecewise-linear interpolant of (knots, values) on [-1, 1]."""

    knots: np.ndarray
    values: np.ndarray
    kind: str = field(default="pwlinear1d", init=False)

    def __post_init__(self):
        object.__setattr__(self, "knots", _freeze(self.knots))
        object.__setattr__(self, "values", _freeze(self.values))
        if self.knots.ndim != 1 or self.knots.shape != self.values.shape:
            raise ValueError("knots and values must be 1D arrays of equal length")
        if not np.all(np.diff(self.knots) > 0):
            raise ValueError("knots must be strictly increasing")

    @property
    def dimension(self) -> int:
        return 1

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.interp(x.reshape(-1) if x.ndim == 2 else x, self.knots, self.values)


def inhomogeneous_1d(n_knots: int = 16) -> PiecewiseLinear1D:
    """Spatially inhomogeneous default target: breakpoints t_j = -1 + 2(j/J)^2
    with values alternating 0, 1.  Dense oscillation near -1, slow near +1."""
    j = np.arange(n_knots + 1)
    return PiecewiseLinear1D(knots=-1.0 + 2.0 * (j / n_knots) ** 2, values=(j % 2).astype(float))


@dataclass(frozen=True)
class GaussianMix2D:
    """Superposition of isotropic Gaussian bumps on the unit disk."""

    amplitudes: np.ndarray
    centers: np.ndarray
    scales: np.ndarray
    kind: str = field(default="gaussmix2d", init=False)

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _freeze(self.amplitudes))
        object.__setattr__(self, "centers", _freeze(np.atleast_2d(self.centers)))
        object.__setattr__(self, "scales", _freeze(self.scales))
        if self.centers.shape != (len(self.amplitudes), 2) or len(self.scales) != len(self.amplitudes):
            raise ValueError("need matching amplitudes, (m, 2) centers, and scales")
        if np.any(self.scales <= 0):
            raise ValueError("scales must be positive")

    @property
    def dimension(self) -> int:
        return 2

    def __call__(self, x) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        sq = ((pts[:, None, :] - self.centers[None, :, :]) ** 2).sum(axis=2)
        vals = (self.amplitudes * np.exp(-sq / (2.0 * self.scales**2))).sum(axis=1)
        return vals if np.asarray(x).ndim == 2 else vals[0]


def gaussian_mix_2d() -> GaussianMix2D:
    """Default three-bump mixture, well separated inside the unit disk."""
    return GaussianMix2D(
        amplitudes=[1.0, 0.75, 0.5],
        centers=[(-0.5, -0.3), (0.4, 0.4), (0.1, -0.5)],
        scales=[0.2, 0.15, 0.25],
    )


@dataclass(frozen=True)
class TriangleRidge2D:
    """Ridge function on the unit disk with a triangular-wave profile."""

    direction: np.ndarray
    period: float = 0.8
    amplitude: float = 1.0
    kind: str = field(default="triridge2d", init=False)

    def __post_init__(self):
        object.__setattr__(self, "direction", _freeze(self.direction))
        if self.direction.shape != (2,):
            raise ValueError("direction must be a 2-vector")
        _check_direction(self.direction)
        if self.period <= 0:
            raise ValueError("period must be positive")

    @property
    def dimension(self) -> int:
        return 2

    def __call__(self, x) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        vals = triangle_wave(pts @ self.direction, self.period, self.amplitude)
        return vals if np.asarray(x).ndim == 2 else vals[0]


def triangle_ridge_2d(angle: float = 1.0, period: float = 0.8, amplitude: float = 1.0) -> TriangleRidge2D:
    """Triangular-wave ridge whose direction is given by an angle in radians."""
    return TriangleRidge2D(direction=np.array([np.cos(angle), np.sin(angle)]), period=period, amplitude=amplitude)


@dataclass(frozen=True)
class PureRidge:
    """Ridge function x -> g(w'x) with a piecewise-linear profile g on [-1, 1]."""

    direction: np.ndarray
    profile_knots: np.ndarray
    profile_values: np.ndarray
    kind: str = field(default="pureridge", init=False)

    def __post_init__(self):
        object.__setattr__(self, "direction", _freeze(self.direction))
        object.__setattr__(self, "profile_knots", _freeze(self.profile_knots))
        object.__setattr__(self, "profile_values", _freeze(self.profile_values))
        if self.direction.ndim != 1 or not 1 <= self.direction.size <= MAX_DIMENSION:
            raise ValueError(f"direction must be a vector of length 1..{MAX_DIMENSION}")
        _check_direction(self.direction)
        if self.profile_knots.shape != self.profile_values.shape or self.profile_knots.ndim != 1:
            raise ValueError("profile knots and values must be 1D arrays of equal length")
        if not np.all(np.diff(self.profile_knots) > 0):
            raise ValueError("profile knots must be strictly increasing")

    @property
    def dimension(self) -> int:
        return int(self.direction.size)

    def __call__(self, x) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        vals = np.interp(pts @ self.direction, self.profile_knots, self.profile_values)
        return vals if np.asarray(x).ndim == 2 else vals[0]


TargetFunction = Union[PiecewiseLinear1D, GaussianMix2D, TriangleRidge2D, PureRidge]


def eval_target(target: TargetFunction, x) -> np.ndarray:
    """Evaluate a target at one point or a batch, enforcing the domain contract.

    Raises ValueError on dimension mismatch or points more than 1e-9
    outside the closed unit ball.
    """
    pts = np.asarray(x, dtype=float)
    d = target.dimension
    if d == 1 and pts.ndim == 0:
        pts = pts.reshape(1, 1)
        scalar = True
    elif pts.ndim == 1:
        if pts.size != d:
            raise ValueError(f"point has length {pts.size}, target has dimension {d}")
        pts = pts.reshape(1, d)
        scalar = True
    else:
        if pts.ndim != 2 or pts.shape[1] != d:
            raise ValueError(f"points must have shape (n, {d})")
        scalar = False
    norms = np.linalg.norm(pts, axis=1)
    if np.any(norms > 1.0 + _BALL_TOL):
        worst = float(norms.max())
        raise ValueError(f"point outside the closed unit ball: |x| = {worst:.12g}")
    vals = target(pts if d > 1 else pts[:, 0])
    return float(vals[0]) if scalar else np.asarray(vals)


# ---------------------------------------------------------------------------
# Sampling


@dataclass(frozen=True)
class Dataset:
    """Design points in the unit ball plus noisy responses.

    Immutable; regeneration from (target, n, sigma, seed, design) via
    ``make_dataset`` is bit-identical.
    """

    dimension: int
    points: np.ndarray
    responses: np.ndarray
    sigma: float
    seed: int
    design: str

    def __post_init__(self):
        object.__setattr__(self, "points", _freeze(self.points))
        object.__setattr__(self, "responses", _freeze(self.responses))
        if self.points.ndim != 2 or self.points.shape[1] != self.dimension:
            raise ValueError("points must have shape (n, dimension)")
        if self.responses.shape != (self.points.shape[0],):
            raise ValueError("responses length must equal points length")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if np.any(np.linalg.norm(self.points, axis=1) > 1.0 + 1e-12):
            raise ValueError("all points must lie in the closed unit ball")
        if self.design not in ("grid", "ball"):
            raise ValueError(f"unknown design {self.design!r}")

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def x(self) -> np.ndarray:
        """1D view of the points (dimension 1 only)."""
        if self.dimension != 1:
            raise ValueError("x view requires dimension 1")
        return self.points[:, 0]


def uniform_ball(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n i.i.d. uniform points on the unit ball in R^d.

    Gaussian direction times radius U^(1/d); the draw order (all Gaussians,
    then all radii) is part of the seeding contract.
    """
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0.0] = 1.0
    r = rng.random(n) ** (1.0 / d)
    return g / norms[:, None] * r[:, None]


def make_dataset(target: TargetFunction, n: int, sigma: float, seed: int, design: str = "ball") -> Dataset:
    """Sample ``y = f(x) + eps`` with eps ~ N(0, sigma^2), deterministically.

    design "grid" places n equispaced points on [-1, 1] (dimension 1 only);
    design "ball" draws i.i.d. uniform points on the unit ball.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    d = target.dimension
    rng = np.random.default_rng(np.uint64(seed))
    if design == "grid":
        if d != 1:
            raise ValueError("grid design is defined for dimension 1 only")
        pts = np.linspace(-1.0, 1.0, n).reshape(n, 1)
    elif design == "ball":
        pts = uniform_ball(n, d, rng)
    else:
        raise ValueError(f"unknown design {design!r}")
    clean = target(pts if d > 1 else pts[:, 0])
    y = np.asarray(clean, dtype=float) + sigma * rng.standard_normal(n)
    return Dataset(dimension=d, points=pts, responses=y, sigma=float(sigma), seed=int(seed), design=design)


# ---------------------------------------------------------------------------
# Serialization


def target_config(target: TargetFunction) -> dict:
    """Kind-tagged parameter record, round-trippable via target_from_config."""
    if isinstance(target, PiecewiseLinear1D):
        return {"kind": target.kind, "knots": target.knots, "values": target.values}
    if isinstance(target, GaussianMix2D):
        return {
            "kind": target.kind,
            "amplitudes": target.amplitudes,
            "centers": target.centers,
            "scales": target.scales,
        }
    if isinstance(target, TriangleRidge2D):
        return {
            "kind": target.kind,
            "direction": target.direction,
            "period": target.period,
            "amplitude": target.amplitude,
        }
    if isinstance(target, PureRidge):
        return {
            "kind": target.kind,
            "direction": target.direction,
            "profile_knots": target.profile_knots,
            "profile_values": target.profile_values,
        }
    raise TypeError(f"not a target function: {type(target).__name__}")


def target_from_config(cfg: dict) -> TargetFunction:
    kind = cfg.get("kind")
    if kind == "pwlinear1d":
        return PiecewiseLinear1D(knots=cfg["knots"], values=cfg["values"])
    if kind == "gaussmix2d":
        return GaussianMix2D(amplitudes=cfg["amplitudes"], centers=cfg["centers"], scales=cfg["scales"])
    if kind == "triridge2d":
        return TriangleRidge2D(direction=cfg["direction"], period=cfg["period"], amplitude=cfg["amplitude"])
    if kind == "pureridge":
        return PureRidge(
            direction=cfg["direction"],
            profile_knots=cfg["profile_knots"],
            profile_values=cfg["profile_values"],
        )
    raise ValueError(f"unknown target kind {kind!r}")


def dataset_metadata(dataset: Dataset, target: TargetFunction) -> dict:
    """Sidecar record sufficient to regenerate the dataset bit-exactly."""
    return {
        "target": target_config(target),
        "n": len(dataset),
        "sigma": dataset.sigma,
        "seed": dataset.seed,
        "design": dataset.design,
    }


def write_dataset_csv(dataset: Dataset, path) -> None:
    """CSV with header x1,...,xd,y; 17 significant digits, LF line endings."""
    d = dataset.dimension
    header = ",".join([f"x{i + 1}" for i in range(d)] + ["y"])
    lines = [header]
    for row, y in zip(dataset.points, dataset.responses):
        lines.append(",".join([fmt17(v) for v in row] + [fmt17(y)]))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_dataset_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read back (points, responses) from a dataset CSV."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header[-1] != "y" or any(h != f"x{i + 1}" for i, h in enumerate(header[:-1])):
            raise ValueError(f"unexpected dataset CSV header: {header}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return data[:, :-1], data[:, -1]
