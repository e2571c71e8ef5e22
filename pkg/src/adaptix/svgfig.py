"""Hand-rolled static SVG plots: line/scatter panels, log-log rate plots
with reference slope lines, and rasterized heatmap panels.

Output is deterministic text (SVG 1.1, fixed two-decimal pixel
coordinates, no timestamps), so repeated renders of the same data are
byte-identical and diffable.  Every figure embeds its source numbers in a
<metadata> element as a JSON document using the same 17-significant-digit
formatting as the CSV writers; tests parse that block back and compare it
against the data the figure claims to plot.

Heatmaps are a 128x128 grid of filled rectangles under a fixed
piecewise-linear dark-to-light colormap; lighter cells mean larger values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .jsonio import dumps as json_dumps

PALETTE = ("#2a6f97", "#c44536", "#3a7d44", "#7d5ba6", "#b8860b", "#444444")
_CMAP_STOPS = ((0.0, (18, 18, 52)), (0.5, (122, 72, 110)), (1.0, (248, 244, 191)))
METADATA_OPEN = '<metadata id="figure-data">'
METADATA_CLOSE = "</metadata>"


def colormap(u: float) -> str:
    """Piecewise-linear dark-to-light map of u in [0, 1] to an RGB hex."""
    u = min(1.0, max(0.0, float(u)))
    for (u0, c0), (u1, c1) in zip(_CMAP_STOPS[:-1], _CMAP_STOPS[1:]):
        if u <= u1:
            w = 0.0 if u1 == u0 else (u - u0) / (u1 - u0)
            rgb = tuple(round(a + w * (b - a)) for a, b in zip(c0, c1))
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#{:02x}{:02x}{:02x}".format(*_CMAP_STOPS[-1][1])


def _px(v: float) -> str:
    return f"{float(v):.2f}"


@dataclass(frozen=True)
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    kind: str = "line"  # "line" | "points" | "errorbars"
    color: Optional[str] = None
    yerr: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ValueError("series x and y must be matching 1D arrays")
        if self.yerr is not None:
            object.__setattr__(self, "yerr", np.asarray(self.yerr, dtype=float))


@dataclass(frozen=True)
class RefLine:
    """Reference power law through (anchor_x, anchor_y) with a log-log slope."""

    slope: float
    anchor_x: float
    anchor_y: float
    label: str = ""


@dataclass(frozen=True)
class LinePanel:
    title: str
    series: tuple
    xlabel: str = ""
    ylabel: str = ""
    logx: bool = False
    logy: bool = False
    refs: tuple = ()


@dataclass(frozen=True)
class HeatPanel:
    """values[i, j] belongs to the cell centered at (xs[j], ys[i]); NaN
    cells are left unpainted (used to mask the outside of the unit disk)."""

    title: str
    values: np.ndarray
    points: Optional[np.ndarray] = None
    point_values: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 2:
            raise ValueError("heatmap values must be a 2D array")


@dataclass(frozen=True)
class _Frame:
    x0: float
    y0: float
    w: float
    h: float
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    logx: bool = False
    logy: bool = False

    def tx(self, x):
        x = np.log10(x) if self.logx else np.asarray(x, dtype=float)
        return self.x0 + (x - self.xmin) / (self.xmax - self.xmin) * self.w

    def ty(self, y):
        y = np.log10(y) if self.logy else np.asarray(y, dtype=float)
        return self.y0 + (self.ymax - y) / (self.ymax - self.ymin) * self.h


def _data_range(vals: np.ndarray, log: bool) -> tuple[float, float]:
    v = vals[np.isfinite(vals)]
    if log:
        v = v[v > 0]
    if v.size == 0:
        return (0.1, 1.0) if log else (0.0, 1.0)
    lo, hi = float(np.min(v)), float(np.max(v))
    if log:
        lo, hi = np.log10(lo), np.log10(hi)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.06 * (hi - lo)
    return lo - pad, hi + pad


def _ticks(lo: float, hi: float, log: bool, count: int = 5) -> list[tuple[float, str]]:
    out = []
    for u in np.linspace(lo, hi, count):
        val = 10.0**u if log else u
        out.append((u, f"{val:.3g}"))
    return out


def _panel_frame(parts: list, panel_idx: int, origin, size, title) -> tuple[float, float, float, float]:
    ox, oy = origin
    pw, ph = size
    ml, mr, mt, mb = 52.0, 14.0, 30.0, 40.0
    x0, y0 = ox + ml, oy + mt
    w, h = pw - ml - mr, ph - mt - mb
    parts.append(
        f'<rect x="{_px(x0)}" y="{_px(y0)}" width="{_px(w)}" height="{_px(h)}" '
        'fill="#fbfbf7" stroke="#22222a" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{_px(ox + pw / 2)}" y="{_px(oy + 19)}" text-anchor="middle" '
        f'font-size="13" font-weight="bold">{escape(title)}</text>'
    )
    return x0, y0, w, h


def _axes(parts: list, fr: _Frame, xlabel: str, ylabel: str) -> None:
    for u, lab in _ticks(fr.xmin, fr.xmax, fr.logx):
        px = fr.x0 + (u - fr.xmin) / (fr.xmax - fr.xmin) * fr.w
        parts.append(
            f'<line x1="{_px(px)}" y1="{_px(fr.y0 + fr.h)}" x2="{_px(px)}" '
            f'y2="{_px(fr.y0 + fr.h + 4)}" stroke="#22222a" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_px(px)}" y="{_px(fr.y0 + fr.h + 16)}" text-anchor="middle" '
            f'font-size="10">{escape(lab)}</text>'
        )
    for u, lab in _ticks(fr.ymin, fr.ymax, fr.logy):
        py = fr.y0 + (fr.ymax - u) / (fr.ymax - fr.ymin) * fr.h
        parts.append(
            f'<line x1="{_px(fr.x0 - 4)}" y1="{_px(py)}" x2="{_px(fr.x0)}" '
            f'y2="{_px(py)}" stroke="#22222a" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_px(fr.x0 - 6)}" y="{_px(py + 3)}" text-anchor="end" '
            f'font-size="10">{escape(lab)}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{_px(fr.x0 + fr.w / 2)}" y="{_px(fr.y0 + fr.h + 32)}" '
            f'text-anchor="middle" font-size="11">{escape(xlabel)}</text>'
        )
    if ylabel:
        cx, cy = fr.x0 - 38, fr.y0 + fr.h / 2
        parts.append(
            f'<text x="{_px(cx)}" y="{_px(cy)}" text-anchor="middle" font-size="11" '
            f'transform="rotate(-90 {_px(cx)} {_px(cy)})">{escape(ylabel)}</text>'
        )


def _clip_mask(x: np.ndarray, y: np.ndarray, fr: _Frame) -> np.ndarray:
    ok = np.isfinite(x) & np.isfinite(y)
    if fr.logx:
        ok &= x > 0
    if fr.logy:
        ok &= y > 0
    return ok


def _draw_line_panel(parts: list, panel: LinePanel, origin, size) -> None:
    x0, y0, w, h = _panel_frame(parts, 0, origin, size, panel.title)
    all_x = np.concatenate([s.x for s in panel.series]) if panel.series else np.array([0.0, 1.0])
    all_y = np.concatenate([s.y for s in panel.series]) if panel.series else np.array([0.0, 1.0])
    xmin, xmax = _data_range(all_x, panel.logx)
    ymin, ymax = _data_range(all_y, panel.logy)
    fr = _Frame(x0, y0, w, h, xmin, xmax, ymin, ymax, panel.logx, panel.logy)
    legend_y = y0 + 12.0
    for ref in panel.refs:
        lo = 10.0**fr.xmin if fr.logx else fr.xmin
        hi = 10.0**fr.xmax if fr.logx else fr.xmax
        rx = np.array([lo, hi])
        ry = ref.anchor_y * (rx / ref.anchor_x) ** ref.slope
        px, py = fr.tx(rx), fr.ty(ry)
        parts.append(
            f'<line x1="{_px(px[0])}" y1="{_px(py[0])}" x2="{_px(px[1])}" y2="{_px(py[1])}" '
            'stroke="#999999" stroke-width="1" stroke-dasharray="5,4"/>'
        )
        if ref.label:
            parts.append(
                f'<text x="{_px(x0 + w - 6)}" y="{_px(legend_y)}" text-anchor="end" '
                f'font-size="10" fill="#777777">{escape(ref.label)}</text>'
            )
            legend_y += 12.0
    for i, s in enumerate(panel.series):
        color = s.color or PALETTE[i % len(PALETTE)]
        ok = _clip_mask(s.x, s.y, fr)
        px, py = fr.tx(s.x[ok]), fr.ty(s.y[ok])
        if s.kind == "points":
            for xp, yp in zip(px, py):
                parts.append(f'<circle cx="{_px(xp)}" cy="{_px(yp)}" r="2.2" fill="{color}" fill-opacity="0.75"/>')
        else:
            if s.yerr is not None:
                lo_v = np.maximum(s.y[ok] - s.yerr[ok], 1e-300)
                hi_v = s.y[ok] + s.yerr[ok]
                for xp, yl, yh in zip(px, fr.ty(lo_v), fr.ty(hi_v)):
                    parts.append(
                        f'<line x1="{_px(xp)}" y1="{_px(yl)}" x2="{_px(xp)}" y2="{_px(yh)}" '
                        f'stroke="{color}" stroke-width="1"/>'
                    )
            pairs = " ".join(f"{_px(a)},{_px(b)}" for a, b in zip(px, py))
            parts.append(f'<polyline points="{pairs}" fill="none" stroke="{color}" stroke-width="1.6"/>')
        if s.label:
            parts.append(
                f'<rect x="{_px(x0 + 8)}" y="{_px(legend_y - 7)}" width="14" height="4" fill="{color}"/>'
            )
            parts.append(
                f'<text x="{_px(x0 + 26)}" y="{_px(legend_y)}" font-size="10">{escape(s.label)}</text>'
            )
            legend_y += 12.0
    _axes(parts, fr, panel.xlabel, panel.ylabel)


def _draw_heat_panel(parts: list, panel: HeatPanel, origin, size, vmin: float, vmax: float) -> None:
    x0, y0, w, h = _panel_frame(parts, 0, origin, size, panel.title)
    m, n = panel.values.shape
    span = max(vmax - vmin, 1e-300)
    cw, ch = w / n, h / m
    for i in range(m):
        row = panel.values[i]
        py = y0 + h - (i + 1) * ch  # row 0 at the bottom
        for j in range(n):
            v = row[j]
            if not np.isfinite(v):
                continue
            color = colormap((v - vmin) / span)
            parts.append(
                f'<rect x="{_px(x0 + j * cw)}" y="{_px(py)}" width="{_px(cw + 0.35)}" '
                f'height="{_px(ch + 0.35)}" fill="{color}"/>'
            )
    if panel.points is not None:
        pts = np.asarray(panel.points, dtype=float)
        pv = panel.point_values
        for idx in range(pts.shape[0]):
            px = x0 + (pts[idx, 0] + 1.0) / 2.0 * w
            py = y0 + (1.0 - pts[idx, 1]) / 2.0 * h
            if pv is not None:
                fill = colormap((float(pv[idx]) - vmin) / span)
            else:
                fill = "#ffffff"
            parts.append(
                f'<circle cx="{_px(px)}" cy="{_px(py)}" r="2.4" fill="{fill}" '
                'stroke="#111111" stroke-width="0.5"/>'
            )
    fr = _Frame(x0, y0, w, h, -1.0, 1.0, -1.0, 1.0)
    _axes(parts, fr, "x1", "x2")


def _document(parts: list, width: float, height: float, meta: dict) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_px(width)}" '
        f'height="{_px(height)}" viewBox="0 0 {_px(width)} {_px(height)}" '
        'font-family="DejaVu Sans, sans-serif">'
    )
    meta_block = METADATA_OPEN + escape(json_dumps(meta)) + METADATA_CLOSE
    bg = f'<rect x="0" y="0" width="{_px(width)}" height="{_px(height)}" fill="#ffffff"/>'
    return "\n".join([head, meta_block, bg] + parts + ["</svg>"]) + "\n"


def write_line_figure(path, panels: Sequence[LinePanel], meta: dict, ncols: int = 2,
                      panel_size: tuple = (380.0, 310.0)) -> None:
    pw, ph = panel_size
    ncols = min(ncols, len(panels))
    nrows = (len(panels) + ncols - 1) // ncols
    parts: list = []
    for idx, panel in enumerate(panels):
        origin = ((idx % ncols) * pw, (idx // ncols) * ph)
        _draw_line_panel(parts, panel, origin, panel_size)
    text = _document(parts, ncols * pw, nrows * ph, meta)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def write_heat_figure(path, panels: Sequence[HeatPanel], meta: dict,
                      panel_size: tuple = (340.0, 330.0)) -> None:
    finite = [p.values[np.isfinite(p.values)] for p in panels]
    allv = np.concatenate([f for f in finite if f.size] or [np.array([0.0, 1.0])])
    vmin, vmax = float(np.min(allv)), float(np.max(allv))
    pw, ph = panel_size
    parts: list = []
    for idx, panel in enumerate(panels):
        _draw_heat_panel(parts, panel, (idx * pw, 0.0), panel_size, vmin, vmax)
    text = _document(parts, len(panels) * pw, ph, meta)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def read_embedded_data(path) -> dict:
    """Recover the JSON document a figure embeds (the round-trip check)."""
    import json

    with open(path) as fh:
        text = fh.read()
    start = text.index(METADATA_OPEN) + len(METADATA_OPEN)
    end = text.index(METADATA_CLOSE, start)
    raw = text[start:end]
    raw = raw.replace("&lt;", "<").replace("&gt;", ">").replace("&amp;", "&")
    return json.loads(raw)
