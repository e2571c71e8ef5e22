"""Shallow ReLU networks with a skip connection, and their training loop.

The model is

    f(x) = sum_k v_k * relu(w_k' x - b_k) + c' x + c0

with K neurons, input dimension d, outer weights v, inner weights w_k,
biases b, and an unpenalized affine part (c, c0).

Two penalized least-squares objectives are supported:

* weight decay:  sum_n (y_n - f(x_n))^2 + (lam/2) * sum_k (v_k^2 + |w_k|^2)
* path norm:     sum_n (y_n - f(x_n))^2 + lam * sum_k |v_k| * |w_k|

They are equivalent up to per-neuron rescaling: relu is positively
homogeneous, so (v, w, b) -> (v/a, a*w, a*b) leaves f unchanged, and at
the optimal a the weight-decay penalty equals the path norm (the AM-GM
equality case |v_k| = |w_k|).  ``balance`` applies that rescaling;
``reduce`` puts a network into canonical form (unit-norm inner weights,
biases in [-1, 1], no duplicate or dead neurons).

Training is full-batch gradient descent with heavy-ball momentum and
geometric step backtracking, restarted from several random
initializations.  Everything is deterministic given the config seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from numba import njit

from .targets import Dataset

DEFAULT_MERGE_TOL = 1e-8

WEIGHT_DECAY = "weight_decay"
PATH_NORM = "path_norm"
_KINDS = (WEIGHT_DECAY, PATH_NORM)


class TrainingDivergedError(RuntimeError):
    """Raised when the training objective or gradient turns non-finite."""

    def __init__(self, iteration: int):
        super().__init__(f"non-finite objective at iteration {iteration}")
        self.iteration = iteration


def _freeze(a, dtype=float) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class NetworkParams:
    """Immutable parameter set of a width-K shallow ReLU network."""

    v: np.ndarray
    W: np.ndarray
    b: np.ndarray
    c: np.ndarray
    c0: float
    reduced: bool = False

    def __post_init__(self):
        object.__setattr__(self, "v", _freeze(self.v))
        object.__setattr__(self, "W", _freeze(np.atleast_2d(self.W) if np.size(self.W) else np.asarray(self.W, dtype=float)))
        object.__setattr__(self, "b", _freeze(self.b))
        object.__setattr__(self, "c", _freeze(self.c))
        object.__setattr__(self, "c0", float(self.c0))
        if self.c.ndim != 1 or self.c.size < 1:
            raise ValueError("c must be a vector of length d >= 1")
        d = self.c.size
        k = self.v.size
        W = self.W.reshape(k, d) if self.W.size == k * d else self.W
        if W.shape != (k, d):
            raise ValueError(f"W must have shape ({k}, {d})")
        object.__setattr__(self, "W", _freeze(W))
        if self.v.shape != (k,) or self.b.shape != (k,):
            raise ValueError("v and b must both have length K")

    @property
    def d(self) -> int:
        return self.c.size

    @property
    def K(self) -> int:
        return self.v.size

    def __call__(self, x):
        return forward(self, x)


def empty_network(d: int, c=None, c0: float = 0.0) -> NetworkParams:
    """Width-0 network computing only the affine part."""
    c = np.zeros(d) if c is None else np.asarray(c, dtype=float)
    return NetworkParams(v=np.zeros(0), W=np.zeros((0, d)), b=np.zeros(0), c=c, c0=c0)


def _as_batch(x, d: int) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0:
        if d != 1:
            raise ValueError(f"scalar input but network dimension is {d}")
        return pts.reshape(1, 1), True
    if pts.ndim == 1:
        if pts.size != d:
            raise ValueError(f"point has length {pts.size}, network dimension is {d}")
        return pts.reshape(1, d), True
    if pts.ndim != 2 or pts.shape[1] != d:
        raise ValueError(f"points must have shape (n, {d})")
    return pts, False


def _forward_batch(params: NetworkParams, pts: np.ndarray) -> np.ndarray:
    pre = pts @ params.W.T - params.b
    return np.maximum(pre, 0.0) @ params.v + pts @ params.c + params.c0


def forward(params: NetworkParams, x):
    """Evaluate the network at a point (returns float) or an (n, d) batch."""
    pts, scalar = _as_batch(x, params.d)
    out = _forward_batch(params, pts)
    return float(out[0]) if scalar else out


def path_norm(params: NetworkParams) -> float:
    """sum_k |v_k| * |w_k|_2; invariant under balance, zero for affine nets."""
    return float(np.abs(params.v) @ np.linalg.norm(params.W, axis=1))


def weight_decay_penalty(params: NetworkParams) -> float:
    """(1/2) sum_k (v_k^2 + |w_k|^2); biases and skip never enter."""
    return 0.5 * float(params.v @ params.v + np.sum(params.W * params.W))


def objective(params: NetworkParams, data: Dataset, lam: float, kind: str = WEIGHT_DECAY) -> float:
    """Squared loss (sum over samples) plus the chosen penalty."""
    if data.dimension != params.d:
        raise ValueError(f"data dimension {data.dimension} != network dimension {params.d}")
    if kind not in _KINDS:
        raise ValueError(f"unknown objective kind {kind!r}")
    r = data.responses - _forward_batch(params, data.points)
    pen = weight_decay_penalty(params) if kind == WEIGHT_DECAY else path_norm(params)
    return float(r @ r) + lam * pen


def gradient(params: NetworkParams, data: Dataset, lam: float, kind: str = WEIGHT_DECAY) -> NetworkParams:
    """Exact subgradient of the objective, shaped like the parameters.

    Conventions at kinks: relu'(0) := 0, and the subgradients of |v| at 0
    and of |w| at 0 are taken to be 0, so dead neurons stay dead.
    """
    if data.dimension != params.d:
        raise ValueError(f"data dimension {data.dimension} != network dimension {params.d}")
    if kind not in _KINDS:
        raise ValueError(f"unknown objective kind {kind!r}")
    X, y = data.points, data.responses
    pre = X @ params.W.T - params.b
    act = np.maximum(pre, 0.0)
    r = y - (act @ params.v + X @ params.c + params.c0)
    live = (pre > 0.0).astype(float)
    dv = act.T @ (-2.0 * r)
    dW = params.v[:, None] * ((live * (-2.0 * r)[:, None]).T @ X)
    db = params.v * (live.T @ (2.0 * r))
    dc = X.T @ (-2.0 * r)
    dc0 = -2.0 * float(np.sum(r))
    if kind == WEIGHT_DECAY:
        dv += lam * params.v
        dW += lam * params.W
    else:
        wnorm = np.linalg.norm(params.W, axis=1)
        dv += lam * np.sign(params.v) * wnorm
        safe = np.where(wnorm > 0.0, wnorm, 1.0)
        dW += lam * (np.abs(params.v) / safe)[:, None] * params.W
    return NetworkParams(v=dv, W=dW, b=db, c=dc, c0=dc0)


def balance(params: NetworkParams) -> NetworkParams:
    """Rescale each neuron so |v_k| = |w_k|_2, leaving forward unchanged.

    Neurons with v_k = 0 are zeroed out entirely; neurons with w_k = 0 and
    v_k != 0 compute a constant and are deleted into the intercept.  After
    balancing, the weight-decay penalty equals the path norm.
    """
    wnorm = np.linalg.norm(params.W, axis=1)
    c0 = params.c0
    keep_v, keep_W, keep_b = [], [], []
    for k in range(params.K):
        v, w, b = params.v[k], params.W[k], params.b[k]
        if v == 0.0:
            keep_v.append(0.0)
            keep_W.append(np.zeros(params.d))
            keep_b.append(0.0)
        elif wnorm[k] == 0.0:
            c0 += v * max(0.0, -b)
        else:
            a = np.sqrt(abs(v) / wnorm[k])
            keep_v.append(v / a)
            keep_W.append(a * w)
            keep_b.append(a * b)
    return NetworkParams(
        v=np.array(keep_v),
        W=np.array(keep_W).reshape(len(keep_v), params.d),
        b=np.array(keep_b),
        c=params.c,
        c0=c0,
    )


def reduce(params: NetworkParams, merge_tol: float = DEFAULT_MERGE_TOL) -> NetworkParams:
    """Canonical form: unit-norm inner weights, biases in [-1, 1], no
    duplicate or dead neurons.

    Scale is folded into v and b by homogeneity.  Neurons that are inactive
    on the whole unit ball (b >= 1) contribute nothing and are dropped;
    neurons active on the whole ball (b < -1) are affine there and fold
    into (c, c0).  Coinciding (w, b) pairs merge by summing v; neurons with
    |v| < merge_tol are dropped.  Never increases the path norm.
    """
    if merge_tol <= 0:
        raise ValueError("merge_tol must be positive")
    c = params.c.copy()
    c0 = params.c0
    pool: list[list] = []  # [w, b, v] per surviving neuron, insertion order
    for k in range(params.K):
        v, w, b = params.v[k], params.W[k], params.b[k]
        n = float(np.linalg.norm(w))
        if n == 0.0:
            c0 += v * max(0.0, -b)
            continue
        v, w, b = v * n, w / n, b / n
        if b >= 1.0:
            continue  # relu arg is <= 0 everywhere on the closed ball
        if b < -1.0:
            c += v * w
            c0 -= v * b
            continue
        for entry in pool:
            gap = np.linalg.norm(w - entry[0]) ** 2 + (b - entry[1]) ** 2
            if np.sqrt(gap) <= merge_tol:
                entry[2] += v
                break
        else:
            pool.append([w, b, v])
    kept = [e for e in pool if abs(e[2]) >= merge_tol]
    kk = len(kept)
    return NetworkParams(
        v=np.array([e[2] for e in kept]),
        W=np.array([e[0] for e in kept]).reshape(kk, params.d),
        b=np.array([e[1] for e in kept]),
        c=c,
        c0=c0,
        reduced=True,
    )


# ---------------------------------------------------------------------------
# Training


@dataclass(frozen=True)
class TrainConfig:
    """Settings for train(); width None means one neuron per sample.

    step_size None means 1/(16n): descent accepts after at most a couple
    of halvings on desk-scale problems instead of burning the backtrack
    budget every iteration.  init_scale 1.0 starts inner weights on the
    unit sphere, so initial hinges cut through the unit ball rather than
    clustering near flat.
    """

    lam: float = 0.0
    kind: str = WEIGHT_DECAY
    width: Optional[int] = None
    max_iters: int = 20_000
    step_size: Optional[float] = None
    momentum: float = 0.9
    grad_tol: float = 1e-8
    restarts: int = 1
    init_scale: float = 1.0
    seed: int = 0
    warm_start: Optional[NetworkParams] = None
    merge_tol: float = DEFAULT_MERGE_TOL

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.width is not None and self.width < 1:
            raise ValueError("width must be at least 1")
        if self.max_iters < 1 or self.restarts < 1:
            raise ValueError("max_iters and restarts must be at least 1")
        if self.step_size is not None and self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.grad_tol <= 0 or self.init_scale <= 0:
            raise ValueError("grad_tol and init_scale must be positive")


@dataclass(frozen=True)
class TrainReport:
    final_objective: float
    iterations: int
    grad_norm: float
    restart_objectives: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "restart_objectives", _freeze(self.restart_objectives))


def _pack(v, W, b, c, c0) -> np.ndarray:
    return np.concatenate([v, np.asarray(W).T.reshape(-1), b, c, [c0]])


def _unpack(theta: np.ndarray, k: int, d: int):
    v = theta[:k]
    W = theta[k : k + k * d].reshape(d, k).T
    b = theta[k + k * d : 2 * k + k * d]
    c = theta[2 * k + k * d : 2 * k + k * d + d]
    return v, W, b, c, theta[-1]


# Flat parameter layout used by the compiled descent loop; W is stored
# column-major (one contiguous length-k slice per input coordinate) so the
# hot loops run over contiguous memory:
# theta = [v (k) | W[:,0] (k) | ... | W[:,d-1] (k) | b (k) | c (d) | c0].


@njit(cache=True, nogil=True, fastmath={"reassoc", "contract"})
def _objective_flat(theta, X, y, lam, wd, k, d, a):
    n = X.shape[0]
    off_b = k + d * k
    off_c = off_b + k
    c0 = theta[off_c + d]
    sse = 0.0
    for i in range(n):
        s = c0
        if d == 1:
            xi0 = X[i, 0]
            s += xi0 * theta[off_c]
            for m in range(k):
                s += theta[m] * max(xi0 * theta[k + m] - theta[off_b + m], 0.0)
        elif d == 2:
            xi0 = X[i, 0]
            xi1 = X[i, 1]
            s += xi0 * theta[off_c] + xi1 * theta[off_c + 1]
            for m in range(k):
                am = xi0 * theta[k + m] + xi1 * theta[2 * k + m] - theta[off_b + m]
                s += theta[m] * max(am, 0.0)
        else:
            for m in range(k):
                a[m] = -theta[off_b + m]
            for j in range(d):
                xij = X[i, j]
                base = k + j * k
                for m in range(k):
                    a[m] += xij * theta[base + m]
            for j in range(d):
                s += X[i, j] * theta[off_c + j]
            for m in range(k):
                s += theta[m] * max(a[m], 0.0)
        r = y[i] - s
        sse += r * r
    pen = 0.0
    if wd:
        for m in range(k):
            pen += theta[m] * theta[m]
        for j in range(d):
            base = k + j * k
            for m in range(k):
                pen += theta[base + m] * theta[base + m]
        pen *= 0.5
    else:
        for m in range(k):
            nw = 0.0
            for j in range(d):
                nw += theta[k + j * k + m] ** 2
            pen += abs(theta[m]) * np.sqrt(nw)
    return sse + lam * pen


@njit(cache=True, nogil=True, fastmath={"reassoc", "contract"})
def _gradient_flat(theta, X, y, lam, wd, k, d, g, a):
    n = X.shape[0]
    off_b = k + d * k
    off_c = off_b + k
    c0 = theta[off_c + d]
    for i in range(g.size):
        g[i] = 0.0
    for i in range(n):
        s = c0
        if d == 1:
            xi0 = X[i, 0]
            s += xi0 * theta[off_c]
            for m in range(k):
                am = xi0 * theta[k + m] - theta[off_b + m]
                a[m] = am
                s += theta[m] * max(am, 0.0)
        elif d == 2:
            xi0 = X[i, 0]
            xi1 = X[i, 1]
            s += xi0 * theta[off_c] + xi1 * theta[off_c + 1]
            for m in range(k):
                am = xi0 * theta[k + m] + xi1 * theta[2 * k + m] - theta[off_b + m]
                a[m] = am
                s += theta[m] * max(am, 0.0)
        else:
            for m in range(k):
                a[m] = -theta[off_b + m]
            for j in range(d):
                xij = X[i, j]
                base = k + j * k
                for m in range(k):
                    a[m] += xij * theta[base + m]
            for j in range(d):
                s += X[i, j] * theta[off_c + j]
            for m in range(k):
                s += theta[m] * max(a[m], 0.0)
        r = y[i] - s
        t2 = -2.0 * r
        for m in range(k):  # relu'(0) := 0 keeps dead neurons dead
            am = a[m]
            g[m] += max(am, 0.0) * t2
            live_v = theta[m] * t2 if am > 0.0 else 0.0
            a[m] = live_v
            g[off_b + m] -= live_v
        if d == 1:
            xi0 = X[i, 0]
            for m in range(k):
                g[k + m] += a[m] * xi0
            g[off_c] += t2 * xi0
        elif d == 2:
            xi0 = X[i, 0]
            xi1 = X[i, 1]
            for m in range(k):
                am = a[m]
                g[k + m] += am * xi0
                g[2 * k + m] += am * xi1
            g[off_c] += t2 * xi0
            g[off_c + 1] += t2 * xi1
        else:
            for j in range(d):
                xij = X[i, j]
                base = k + j * k
                for m in range(k):
                    g[base + m] += a[m] * xij
            for j in range(d):
                g[off_c + j] += t2 * X[i, j]
        g[off_c + d] += t2
    if wd:
        for m in range(k + d * k):  # v block then W block, both penalized
            g[m] += lam * theta[m]
    else:
        for m in range(k):
            nw = 0.0
            for j in range(d):
                nw += theta[k + j * k + m] ** 2
            nw = np.sqrt(nw)
            sv = 1.0 if theta[m] > 0.0 else (-1.0 if theta[m] < 0.0 else 0.0)
            g[m] += lam * sv * nw
            if nw > 0.0:
                coef = lam * abs(theta[m]) / nw
                for j in range(d):
                    g[k + j * k + m] += coef * theta[k + j * k + m]


@njit(cache=True, nogil=True)
def _descend(theta, X, y, lam, wd, k, d, base_step, momentum, grad_tol, max_iters):
    """Monotone heavy-ball descent: halve the step (and drop the momentum
    term) until the objective does not increase, restore the step after
    every accepted move.  Returns (J, iters, gnorm, bad_iter); bad_iter >= 0
    flags a non-finite objective or gradient at that iteration."""
    a = np.empty(k)
    J = _objective_flat(theta, X, y, lam, wd, k, d, a)
    if not np.isfinite(J):
        return J, 0, np.inf, 0
    u = np.zeros_like(theta)
    g = np.empty_like(theta)
    delta = np.empty_like(theta)
    trial = np.empty_like(theta)
    gnorm = np.inf
    iters = 0
    for it in range(max_iters):
        _gradient_flat(theta, X, y, lam, wd, k, d, g, a)
        sq = 0.0
        for i in range(g.size):
            sq += g[i] * g[i]
        gnorm = np.sqrt(sq)
        if not np.isfinite(gnorm):
            return J, it, gnorm, it
        iters = it
        if gnorm <= grad_tol:
            return J, iters, gnorm, -1
        step = base_step
        mom = momentum
        accepted = False
        for _ in range(24):
            for i in range(theta.size):
                delta[i] = mom * u[i] - step * g[i]
                trial[i] = theta[i] + delta[i]
            J_try = _objective_flat(trial, X, y, lam, wd, k, d, a)
            if not np.isfinite(J_try):
                return J, it, gnorm, it
            if J_try < J:  # strict: an equal-objective move is no progress
                for i in range(theta.size):
                    theta[i] = trial[i]
                    u[i] = delta[i]
                J = J_try
                accepted = True
                break
            step *= 0.5
            mom = 0.0
        if not accepted:
            return J, iters, gnorm, -1  # numerical floor: no step improves
        iters = it + 1
    return J, iters, gnorm, -1


def _affine_lstsq(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    design = np.column_stack([X, np.ones(len(X))])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return coef[:-1], float(coef[-1])


def train(data: Dataset, config: TrainConfig) -> tuple[NetworkParams, TrainReport]:
    """Fit a network to the dataset by restarted monotone descent.

    Restart r draws its own RNG stream from (seed, r).  If a warm start is
    given, restart 0 instead pads it to the requested width with
    zero-output neurons (v = 0, w = 0, random b), so its starting
    objective equals the warm start's and descent can only improve it.
    The best restart by final objective wins; the winner is returned after
    a terminal balance + reduce pass.  Deterministic given (data, config).
    """
    X = np.ascontiguousarray(data.points, dtype=float)
    y = np.ascontiguousarray(data.responses, dtype=float)
    n, d = X.shape
    k = n if config.width is None else config.width
    warm = config.warm_start
    if warm is not None:
        if warm.d != d:
            raise ValueError("warm start dimension mismatch")
        if warm.K > k:
            raise ValueError(f"warm start has {warm.K} neurons, width is only {k}")
    wd = config.kind == WEIGHT_DECAY
    base_step = config.step_size if config.step_size is not None else 1.0 / (16.0 * n)
    c_ls, c0_ls = _affine_lstsq(X, y)

    best = None
    restart_objs = np.empty(config.restarts)
    for r in range(config.restarts):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, r]))
        if r == 0 and warm is not None:
            pad = k - warm.K
            v0 = np.concatenate([warm.v, np.zeros(pad)])
            W0 = np.vstack([warm.W, np.zeros((pad, d))])
            b0 = np.concatenate([warm.b, rng.uniform(-1.0, 1.0, pad)])
            c0v, c00 = warm.c.copy(), warm.c0
        else:
            dirs = rng.standard_normal((k, d))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            W0 = config.init_scale * dirs
            b0 = rng.uniform(-1.0, 1.0, k)
            v0 = config.init_scale * rng.standard_normal(k)
            c0v, c00 = c_ls, c0_ls
        theta = _pack(v0, W0, b0, c0v, c00)
        J, iters, gnorm, bad_iter = _descend(
            theta, X, y, config.lam, wd, k, d,
            base_step, config.momentum, config.grad_tol, config.max_iters,
        )
        if bad_iter >= 0:
            raise TrainingDivergedError(bad_iter)
        restart_objs[r] = J
        if best is None or J < best[1]:
            best = (theta, J, iters, gnorm)

    v, W, b, c, c0 = _unpack(best[0], k, d)
    params = reduce(balance(NetworkParams(v=v, W=W, b=b, c=c, c0=c0)), merge_tol=config.merge_tol)
    report = TrainReport(
        final_objective=best[1],
        iterations=best[2],
        grad_norm=best[3],
        restart_objectives=restart_objs,
    )
    return params, report


# ---------------------------------------------------------------------------
# Serialization


def network_config(params: NetworkParams) -> dict:
    return {
        "d": params.d,
        "K": params.K,
        "v": params.v,
        "W": params.W,
        "b": params.b,
        "c": params.c,
        "c0": params.c0,
        "reduced": params.reduced,
    }


def network_from_config(cfg: dict) -> NetworkParams:
    d, k = int(cfg["d"]), int(cfg["K"])
    return NetworkParams(
        v=np.asarray(cfg["v"], dtype=float).reshape(k),
        W=np.asarray(cfg["W"], dtype=float).reshape(k, d),
        b=np.asarray(cfg["b"], dtype=float).reshape(k),
        c=np.asarray(cfg["c"], dtype=float).reshape(d),
        c0=float(cfg["c0"]),
        reduced=bool(cfg.get("reduced", False)),
    )
