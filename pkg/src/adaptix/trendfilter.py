"""Exact solver for the 1D locally adaptive linear spline problem.

Minimizes, over intercept beta0, slope beta1, and knot coefficients c_j,

    sum_n (y_n - f(x_n))^2 + lam * sum_j |c_j|,
    f(x) = beta0 + beta1 * x + sum_j c_j * relu(x - t_j),

with candidate knots t_j defaulting to the interior design points (the
trend-filtering convention).  The l1 term penalizes the total variation
of f', so large lam yields few slope changes and lam >= lambda_max
collapses the fit to affine least squares.

For lam > 0 the solver walks the exact solution path: the minimizer is
piecewise linear in lam, so tracking active-set change events from
lambda_max downward and re-solving the small active linear system at the
requested lam gives the exact optimum; optimality is then verified by an
independent KKT sweep.  (Cyclic coordinate descent on the hinge columns,
the obvious alternative, stalls once the active set grows because adjacent
columns become nearly collinear; it is kept for the lam = 0 custom-grid
corner, where the canonical answer is the descent limit from the zero
start, and its per-sweep objective decrease is asserted whenever it runs.)
At lam = 0 on the default knot grid the design is square and full rank and
the solution interpolates the data in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .targets import Dataset


def _freeze(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SplineModel:
    """Piecewise-linear fit: affine part plus active knots and their
    slope-change coefficients.  Only nonzero coefficients are stored."""

    beta0: float
    beta1: float
    knots: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta0", float(self.beta0))
        object.__setattr__(self, "beta1", float(self.beta1))
        object.__setattr__(self, "knots", _freeze(self.knots))
        object.__setattr__(self, "coeffs", _freeze(self.coeffs))
        if self.knots.ndim != 1 or self.knots.shape != self.coeffs.shape:
            raise ValueError("knots and coeffs must be 1D arrays of equal length")
        if self.knots.size and not np.all(np.diff(self.knots) > 0):
            raise ValueError("knots must be strictly increasing")
        if self.knots.size and (self.knots[0] <= -1.0 or self.knots[-1] >= 1.0):
            raise ValueError("knots must lie strictly inside (-1, 1)")

    def __call__(self, x):
        return eval_spline(self, x)


@dataclass(frozen=True)
class TrendDiagnostics:
    objective: float
    kkt_residual: float
    sweeps: int
    converged: bool
    lam: float
    n_active: int


def eval_spline(model: SplineModel, x):
    """beta0 + beta1*x + sum_j c_j * relu(x - t_j); float in, float out."""
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    pts = np.atleast_1d(xs)
    out = model.beta0 + model.beta1 * pts
    if model.knots.size:
        out = out + np.maximum(pts[:, None] - model.knots, 0.0) @ model.coeffs
    return float(out[0]) if scalar else out


def tv2(model: SplineModel) -> float:
    """Total variation of the fitted slope: sum_j |c_j|."""
    return float(np.sum(np.abs(model.coeffs)))


def trend_objective(model: SplineModel, data: Dataset, lam: float) -> float:
    """Squared loss plus lam times tv2, the quantity fit_trend minimizes."""
    r = data.responses - eval_spline(model, data.x)
    return float(r @ r) + lam * tv2(model)


# ---------------------------------------------------------------------------
# Coordinate-descent kernel


@njit(cache=True, nogil=True)
def _kkt_pass(x, r, t, s, c, lam):
    """One right-to-left pass: max KKT violation over all coordinates and
    over the currently active ones (affine terms included in both)."""
    n = x.shape[0]
    m = t.shape[0]
    s1 = 0.0
    sx = 0.0
    viol = 0.0
    viol_act = 0.0
    idx = n - 1
    for j in range(m - 1, -1, -1):
        while idx >= s[j]:
            s1 += r[idx]
            sx += x[idx] * r[idx]
            idx -= 1
        g = 2.0 * (sx - t[j] * s1)
        if c[j] > 0.0:
            v = abs(g - lam)
        elif c[j] < 0.0:
            v = abs(g + lam)
        else:
            v = abs(g) - lam
            if v < 0.0:
                v = 0.0
        if v > viol:
            viol = v
        if c[j] != 0.0 and v > viol_act:
            viol_act = v
    while idx >= 0:
        s1 += r[idx]
        sx += x[idx] * r[idx]
        idx -= 1
    va = abs(2.0 * s1)
    vb = abs(2.0 * sx)
    aff = va if va > vb else vb
    if aff > viol:
        viol = aff
    if aff > viol_act:
        viol_act = aff
    return viol, viol_act


@njit(cache=True, nogil=True)
def _cd_solve(x, y, t, s, col_sq, lam, tol, max_sweeps, c_init):
    n = x.shape[0]
    m = t.shape[0]
    c = c_init.copy()
    sx_tot = 0.0
    sxx_tot = 0.0
    for i in range(n):
        sx_tot += x[i]
        sxx_tot += x[i] * x[i]
    det = n * sxx_tot - sx_tot * sx_tot
    beta0 = 0.0
    beta1 = 0.0
    r = np.empty(n)
    obj_trace = np.empty(max_sweeps)
    sweeps = 0
    kkt = np.inf
    full = True
    while sweeps < max_sweeps:
        if full:
            # rebuild the residual exactly to purge accumulated drift
            for i in range(n):
                r[i] = y[i] - beta0 - beta1 * x[i]
            for j in range(m):
                cj = c[j]
                if cj != 0.0:
                    tj = t[j]
                    for i in range(s[j], n):
                        r[i] -= cj * (x[i] - tj)
        # exact affine refit
        su = 0.0
        sxu = 0.0
        for i in range(n):
            u = r[i] + beta0 + beta1 * x[i]
            su += u
            sxu += x[i] * u
        nb0 = (sxx_tot * su - sx_tot * sxu) / det
        nb1 = (n * sxu - sx_tot * su) / det
        if nb0 != beta0 or nb1 != beta1:
            for i in range(n):
                r[i] += (beta0 - nb0) + (beta1 - nb1) * x[i]
            beta0 = nb0
            beta1 = nb1
        # coordinate pass (all knots on full sweeps, else active only)
        thresh = 0.5 * lam
        for j in range(m):
            cj = c[j]
            if not full and cj == 0.0:
                continue
            tj = t[j]
            sj = s[j]
            acc = cj * col_sq[j]
            for i in range(sj, n):
                acc += (x[i] - tj) * r[i]
            if acc > thresh:
                z = (acc - thresh) / col_sq[j]
            elif acc < -thresh:
                z = (acc + thresh) / col_sq[j]
            else:
                z = 0.0
            dz = z - cj
            if dz != 0.0:
                for i in range(sj, n):
                    r[i] -= dz * (x[i] - tj)
                c[j] = z
        obj = 0.0
        for i in range(n):
            obj += r[i] * r[i]
        for j in range(m):
            obj += lam * abs(c[j])
        obj_trace[sweeps] = obj
        sweeps += 1
        kkt, kkt_act = _kkt_pass(x, r, t, s, c, lam)
        if kkt <= tol:
            break
        if full:
            full = False
        elif kkt_act <= 0.5 * tol:
            full = True  # active set settled; pull in violators next pass
    return beta0, beta1, c, sweeps, kkt, obj_trace[:sweeps]


# ---------------------------------------------------------------------------
# Public fitting interface


def _suffix_sums(a: np.ndarray) -> np.ndarray:
    """out[i] = sum of a[i:]; out has length len(a)+1 with out[-1] = 0."""
    out = np.zeros(a.size + 1)
    out[:-1] = np.cumsum(a[::-1])[::-1]
    return out


def _prepare(x: np.ndarray, knot_grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = x.size
    if knot_grid is None:
        t = x[1 : n - 1]
    else:
        t = np.asarray(knot_grid, dtype=float)
        if t.ndim != 1:
            raise ValueError("knot_grid must be a 1D sequence")
        if t.size and not np.all(np.diff(t) > 0):
            raise ValueError("knot_grid must be strictly increasing")
        if t.size and (t[0] <= -1.0 or t[-1] >= 1.0):
            raise ValueError("knots must lie strictly inside (-1, 1)")
    s = np.searchsorted(x, t, side="right").astype(np.int64)
    cnt = n - s
    suf_x = _suffix_sums(x)
    suf_xx = _suffix_sums(x * x)
    col_sq = suf_xx[s] - 2.0 * t * suf_x[s] + t * t * cnt
    live = col_sq > 0.0  # knots with no design point above can never activate
    return t[live], s[live], col_sq[live]


# ---------------------------------------------------------------------------
# Exact solution path
#
# The minimizer is piecewise linear in lam: between active-set changes,
# gamma(lam) = gamma_ls - lam * h with [U A_E]'[U A_E] gamma_ls = [U A_E]'y
# and the same matrix applied to (0, 0, signs/2) giving h.  Walking lam
# downward from lambda_max, the next event is either an inactive knot's
# gradient 2 a_j'r(lam) = p_j + lam q_j hitting the +/-lam boundary or an
# active coefficient crossing zero.  Solving the small active system at
# each event gives the exact minimizer at every lam on the way down, which
# cyclic coordinate descent alone cannot reach in bounded sweeps once the
# active set grows (adjacent hinge columns become nearly collinear).


class _PathState:
    """Suffix-sum machinery for hinge-column inner products on sorted x."""

    def __init__(self, x: np.ndarray, y: np.ndarray, t: np.ndarray, s: np.ndarray):
        self.x, self.y, self.t, self.s = x, y, t, s
        self.n = x.size
        self.cnt = (x.size - s).astype(float)
        self.suf_x = _suffix_sums(x)
        self.suf_xx = _suffix_sums(x * x)
        self.uty = np.array([y.sum(), x @ y])
        self.utu = np.array([[float(x.size), x.sum()], [x.sum(), x @ x]])
        self.aty = self.hinge_dots(y)

    def hinge_dots(self, z: np.ndarray) -> np.ndarray:
        """a_j' z for every candidate knot at once."""
        suf_z = _suffix_sums(z)
        suf_xz = _suffix_sums(self.x * z)
        return suf_xz[self.s] - self.t * suf_z[self.s]

    def gram_row(self, j: int, others: np.ndarray) -> np.ndarray:
        """a_j' a_k for each k in others (exploits nested hinge supports)."""
        hi = np.maximum(self.s[others], self.s[j])
        t_hi = np.where(self.s[others] >= self.s[j], self.t[others], self.t[j])
        t_lo = np.where(self.s[others] >= self.s[j], self.t[j], self.t[others])
        return self.suf_xx[hi] - (t_lo + t_hi) * self.suf_x[hi] + t_lo * t_hi * (self.n - hi)

    def u_col(self, j: int) -> np.ndarray:
        """[1'a_j, x'a_j]."""
        sj, tj = self.s[j], self.t[j]
        return np.array([self.suf_x[sj] - tj * self.cnt[j], self.suf_xx[sj] - tj * self.suf_x[sj]])

    def design_eval(self, beta: np.ndarray, active: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        """[U A_E] gamma at the design points in O(n + |E|)."""
        add_c = np.zeros(self.n + 1)
        add_ct = np.zeros(self.n + 1)
        np.add.at(add_c, self.s[active], coeffs)
        np.add.at(add_ct, self.s[active], coeffs * self.t[active])
        run_c = np.cumsum(add_c[:-1])
        run_ct = np.cumsum(add_ct[:-1])
        return beta[0] + beta[1] * self.x + self.x * run_c - run_ct


_MAX_EVENTS = 50_000


def _solve_refined(G: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    sol = np.linalg.solve(G, rhs)
    return sol + np.linalg.solve(G, rhs - G @ sol)


def _path_segments(state: _PathState, lam_stop: float):
    """Walk the solution path down to lam_stop.  Returns a list of
    (lam_hi, lam_lo, active_idx, signs, gamma_ls, h): on [lam_lo, lam_hi]
    the minimizer is gamma_ls - lam*h over columns [1, x, hinges[active]]."""
    t, s = state.t, state.s
    m = t.size
    active: list = []
    signs: list = []
    G = state.utu.copy()
    rhs_y = state.uty.copy()
    segments = []
    lam_cur = np.inf
    is_active = np.zeros(m, dtype=bool)
    last_add = -1  # previous event's coordinate: barred from immediately
    last_drop = -1  # reversing itself at the same lam (degenerate bounce)
    for _ in range(_MAX_EVENTS):
        E = np.asarray(active, dtype=np.int64)
        sg = np.asarray(signs, dtype=float)
        both = _solve_refined(G, np.column_stack([rhs_y, np.concatenate([np.zeros(2), sg / 2.0])]))
        gamma_ls, h = both[:, 0], both[:, 1]
        z0 = state.y - state.design_eval(gamma_ls[:2], E, gamma_ls[2:])
        z1 = state.design_eval(h[:2], E, h[2:]) if (h != 0.0).any() else np.zeros(state.n)
        p = 2.0 * state.hinge_dots(z0)
        q = 2.0 * state.hinge_dots(z1)

        lam_next = -np.inf
        event = None  # ("add", j, sign) or ("drop", position)
        bounce = lam_cur * (1.0 - 1e-10) if np.isfinite(lam_cur) else np.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            lam_plus = p / (1.0 - q)
            lam_minus = -p / (1.0 + q)
        for cand, sign in ((lam_plus, 1.0), (lam_minus, -1.0)):
            ok = (~is_active) & np.isfinite(cand) & (cand > lam_stop) & (cand <= lam_cur * (1 + 1e-12))
            if last_drop >= 0:
                ok = ok & ~((np.arange(m) == last_drop) & (cand >= bounce))
            if ok.any():
                j = int(np.flatnonzero(ok)[np.argmax(cand[ok])])
                if cand[j] > lam_next:
                    lam_next, event = float(cand[j]), ("add", j, sign)
        if E.size:
            with np.errstate(divide="ignore", invalid="ignore"):
                cross = gamma_ls[2:] / h[2:]
            ok = np.isfinite(cross) & (cross > lam_stop) & (cross <= lam_cur * (1 + 1e-12))
            if last_add >= 0:
                ok = ok & ~((E == last_add) & (cross >= bounce))
            if ok.any():
                k = int(np.flatnonzero(ok)[np.argmax(cross[ok])])
                if cross[k] > lam_next:
                    lam_next, event = float(cross[k]), ("drop", k)

        lam_lo = max(lam_next, lam_stop) if event is not None else lam_stop
        segments.append((lam_cur, lam_lo, E, sg, gamma_ls, h))
        if event is None or lam_next <= lam_stop:
            return segments
        lam_cur = lam_next
        if event[0] == "add":
            _, j, sign = event
            urow = state.u_col(j)
            grow = state.gram_row(j, E) if E.size else np.empty(0)
            row = np.concatenate([urow, grow, [state.gram_row(j, np.array([j], dtype=np.int64))[0]]])
            G = np.pad(G, ((0, 1), (0, 1)))
            G[-1, :] = row
            G[:, -1] = row
            rhs_y = np.append(rhs_y, state.aty[j])
            active.append(j)
            signs.append(sign)
            is_active[j] = True
            last_add, last_drop = j, -1
        else:
            k = event[1]
            last_add, last_drop = -1, active[k]
            is_active[active[k]] = False
            del active[k]
            del signs[k]
            G = np.delete(np.delete(G, 2 + k, axis=0), 2 + k, axis=1)
            rhs_y = np.delete(rhs_y, 2 + k)
    raise RuntimeError(f"solution path exceeded {_MAX_EVENTS} active-set events")


def _segment_at(segments, lam: float):
    for seg in segments:
        if seg[1] <= lam <= seg[0]:
            return seg
    return segments[-1]


def _active_solve(state: _PathState, E: np.ndarray, sg: np.ndarray, lam: float) -> np.ndarray:
    """Minimize over the fixed active set with fixed signs: solve the
    stationarity system for [beta0, beta1, c_E]."""
    if not E.size:
        return _solve_refined(state.utu, state.uty)
    G = np.pad(state.utu.copy(), ((0, E.size), (0, E.size)))
    for i, j in enumerate(E):
        urow = state.u_col(j)
        G[:2, 2 + i] = urow
        G[2 + i, :2] = urow
        row = state.gram_row(j, E)
        G[2 + i, 2:] = row
        G[2:, 2 + i] = row
    rhs = np.concatenate([state.uty, state.aty[E]]) - lam * np.concatenate([np.zeros(2), sg / 2.0])
    return _solve_refined(G, rhs)


_MAX_PIVOTS = 500


def _path_solution(state: _PathState, segments, lam: float, data: Dataset, tol: float):
    """Exact minimizer at one lam.  The path segment supplies the active
    set; an active-set pivoting loop then repairs any residual defect
    (dropping sign-inconsistent coordinates, admitting boundary violators)
    before the KKT residual is measured from scratch."""
    _, _, E, sg, _, _ = _segment_at(segments, lam)
    E, sg = list(E), list(sg)
    for _ in range(_MAX_PIVOTS):
        Ea = np.asarray(E, dtype=np.int64)
        sga = np.asarray(sg, dtype=float)
        gamma = _active_solve(state, Ea, sga, lam)
        c = gamma[2:]
        wrong = np.flatnonzero(c * sga < 0.0)
        if wrong.size:
            k = int(wrong[np.argmax(np.abs(c[wrong]))])
            del E[k]
            del sg[k]
            continue
        z = state.y - state.design_eval(gamma[:2], Ea, c)
        g = 2.0 * state.hinge_dots(z)
        g[Ea] = 0.0
        j = int(np.argmax(np.abs(g))) if g.size else -1
        if j >= 0 and np.abs(g[j]) > lam * (1.0 + 1e-12) + 1e-13:
            E.append(j)
            sg.append(float(np.sign(g[j])))
            continue
        break
    E = np.asarray(E, dtype=np.int64)
    beta0, beta1 = float(gamma[0]), float(gamma[1])
    c_full = np.zeros(state.t.size)
    c_full[E] = gamma[2:]
    order = np.argsort(state.t[E]) if E.size else np.empty(0, dtype=np.int64)
    knots = state.t[E][order] if E.size else np.empty(0)
    coeffs = gamma[2:][order] if E.size else np.empty(0)
    keep = coeffs != 0.0 if E.size else np.empty(0, dtype=bool)
    model = SplineModel(beta0=beta0, beta1=beta1, knots=knots[keep], coeffs=coeffs[keep])
    r = state.y - state.design_eval(np.array([beta0, beta1]), E, c_full[E])
    viol, _ = _kkt_pass(state.x, r, state.t, state.s, c_full, lam)
    diag = TrendDiagnostics(
        objective=trend_objective(model, data, lam),
        kkt_residual=float(viol),
        sweeps=0,
        converged=bool(viol <= tol),
        lam=float(lam),
        n_active=int(np.count_nonzero(keep)),
    )
    return model, diag


def lambda_max(data: Dataset, knot_grid=None) -> float:
    """Smallest lam at which the solution is exactly affine least squares:
    max_j |2 a_j'(y - y_affine)| over candidate knot columns a_j."""
    x, y, order = _sorted_xy(data)
    t, s, _ = _prepare(x, knot_grid)
    if t.size == 0:
        return 0.0
    design = np.column_stack([np.ones(x.size), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    r = y - design @ coef
    suf_r = _suffix_sums(r)
    suf_xr = _suffix_sums(x * r)
    return float(np.max(np.abs(2.0 * (suf_xr[s] - t * suf_r[s]))))


def _sorted_xy(data: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if data.dimension != 1:
        raise ValueError("trend filtering is defined for 1D data only")
    if len(data) < 2:
        raise ValueError("need at least 2 points")
    x_raw = data.x
    order = np.argsort(x_raw, kind="stable")
    x = x_raw[order]
    if np.any(np.diff(x) == 0.0):
        raise ValueError("design points must be distinct")
    return x, data.responses[order], order


def _interpolate(x: np.ndarray, y: np.ndarray, data: Dataset) -> tuple[SplineModel, TrendDiagnostics]:
    """Exact unpenalized solution on the default knot grid: with knots at the
    interior design points the design is square and full rank, so the unique
    minimizer interpolates the data.  Coordinate descent reaches the same
    fitted values only in the sweep limit; the closed form is exact."""
    slopes = np.diff(y) / np.diff(x)
    beta1 = float(slopes[0])
    beta0 = float(y[0] - beta1 * x[0])
    c = np.diff(slopes)
    t = x[1:-1]
    active = c != 0.0
    model = SplineModel(beta0=beta0, beta1=beta1, knots=t[active], coeffs=c[active])
    s = np.searchsorted(x, t, side="right").astype(np.int64)
    r = y - eval_spline(model, x)
    viol, _ = _kkt_pass(x, r, t, s, c, 0.0)
    diag = TrendDiagnostics(
        objective=trend_objective(model, data, 0.0),
        kkt_residual=float(viol),
        sweeps=0,
        converged=True,
        lam=0.0,
        n_active=int(np.count_nonzero(active)),
    )
    return model, diag


def fit_trend(
    data: Dataset,
    lam: float,
    knot_grid: Optional[Sequence[float]] = None,
    tol: float = 1e-10,
    max_sweeps: int = 100_000,
    warm_start: Optional[SplineModel] = None,
) -> tuple[SplineModel, TrendDiagnostics]:
    """Solve the adaptive-spline problem at one lam.

    Returns the model (active knots only) and diagnostics.  For lam > 0
    the exact path solver is used and warm_start only needs to sit on the
    candidate grid (it is validated, not required); for lam = 0 on a
    custom knot_grid the answer is the coordinate-descent limit from the
    warm start (zero coefficients by default), and tol / max_sweeps bound
    that descent.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if tol <= 0 or max_sweeps < 1:
        raise ValueError("tol must be positive and max_sweeps at least 1")
    x, y, _ = _sorted_xy(data)
    if lam == 0.0 and knot_grid is None and warm_start is None:
        return _interpolate(x, y, data)
    t, s, col_sq = _prepare(x, knot_grid)
    c0 = np.zeros(t.size)
    if warm_start is not None and warm_start.knots.size:
        pos = np.searchsorted(t, warm_start.knots)
        ok = (pos < t.size) & (np.abs(t[np.minimum(pos, t.size - 1)] - warm_start.knots) <= 1e-12)
        if not np.all(ok):
            raise ValueError("warm-start knot not on the candidate grid")
        c0[pos] = warm_start.coeffs
    if lam > 0.0:
        state = _PathState(x, y, t, s)
        segments = _path_segments(state, float(lam))
        return _path_solution(state, segments, float(lam), data, float(tol))
    beta0, beta1, c, sweeps, kkt, trace = _cd_solve(
        x, y, t, s, col_sq, float(lam), float(tol), int(max_sweeps), c0
    )
    if trace.size > 1:
        worst = float(np.max(np.diff(trace)))
        if worst > 1e-9 * (1.0 + abs(trace[0])):
            raise RuntimeError(f"objective increased across sweeps by {worst:.3e}")
    active = c != 0.0
    model = SplineModel(beta0=beta0, beta1=beta1, knots=t[active], coeffs=c[active])
    diag = TrendDiagnostics(
        objective=float(trace[-1]) if trace.size else trend_objective(model, data, lam),
        kkt_residual=float(kkt),
        sweeps=int(sweeps),
        converged=bool(kkt <= tol),
        lam=float(lam),
        n_active=int(np.count_nonzero(active)),
    )
    return model, diag


def fit_trend_path(
    data: Dataset,
    lams: Sequence[float],
    knot_grid: Optional[Sequence[float]] = None,
    tol: float = 1e-10,
    max_sweeps: int = 100_000,
) -> list[tuple[SplineModel, TrendDiagnostics]]:
    """Fit a grid of lam values with one path walk down to the smallest
    positive lam (exact at every requested value); lam = 0 entries use the
    closed-form interpolant or, on a custom grid, coordinate descent.
    Results align with lams."""
    lams = np.asarray(lams, dtype=float)
    if lams.ndim != 1 or lams.size == 0:
        raise ValueError("lams must be a nonempty 1D sequence")
    if np.any(lams < 0):
        raise ValueError("lams must be nonnegative")
    x, y, _ = _sorted_xy(data)
    t, s, col_sq = _prepare(x, knot_grid)
    results: list = [None] * lams.size
    positive = lams > 0.0
    if positive.any():
        state = _PathState(x, y, t, s)
        segments = _path_segments(state, float(lams[positive].min()))
        for pos in np.flatnonzero(positive):
            results[pos] = _path_solution(state, segments, float(lams[pos]), data, float(tol))
    order = [pos for pos in np.argsort(-lams, kind="stable") if not positive[pos]]
    c_warm = np.zeros(t.size)
    for pos in order:
        lam = float(lams[pos])
        if lam == 0.0 and knot_grid is None:
            results[pos] = _interpolate(x, y, data)
            continue
        beta0, beta1, c, sweeps, kkt, trace = _cd_solve(
            x, y, t, s, col_sq, lam, float(tol), int(max_sweeps), c_warm
        )
        c_warm = c
        active = c != 0.0
        model = SplineModel(beta0=beta0, beta1=beta1, knots=t[active], coeffs=c[active])
        diag = TrendDiagnostics(
            objective=float(trace[-1]) if trace.size else trend_objective(model, data, lam),
            kkt_residual=float(kkt),
            sweeps=int(sweeps),
            converged=bool(kkt <= tol),
            lam=lam,
            n_active=int(np.count_nonzero(active)),
        )
        results[pos] = (model, diag)
    return results


# ---------------------------------------------------------------------------
# Serialization


def spline_config(model: SplineModel) -> dict:
    return {"beta0": model.beta0, "beta1": model.beta1, "knots": model.knots, "coeffs": model.coeffs}


def spline_from_config(cfg: dict) -> SplineModel:
    return SplineModel(
        beta0=float(cfg["beta0"]),
        beta1=float(cfg["beta1"]),
        knots=np.asarray(cfg["knots"], dtype=float),
        coeffs=np.asarray(cfg["coeffs"], dtype=float),
    )
