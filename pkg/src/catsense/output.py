"""CSV and SVG writers for sweep results.

SVG is written by hand so figure reproduction needs no plotting library.
Heatmaps use viridis, linearly interpolated between the ten stops below
(monotone in lightness).
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from catsense import __version__
from catsense.errors import UnsupportedShape
from catsense.sweep import QUANTITIES, SweepResult

CSV_COLUMNS = ("D", "theta", "kappaT", "pg_exact", "pg_approx", "pg_paper_literal", "pg_oracle", "snr")
assert set(CSV_COLUMNS[3:]) == set(QUANTITIES)

VIRIDIS = (
    (68, 1, 84), (72, 40, 120), (62, 74, 137), (49, 104, 142), (38, 130, 142),
    (31, 158, 137), (53, 183, 121), (109, 205, 89), (180, 222, 44), (253, 231, 37),
)


def _fmt(v) -> str:
    if v is None:
        return ""
    return format(float(v), ".17g")


def metadata_line(result: SweepResult) -> str:
    return f"# catsense {__version__} spec-hash={result.spec.digest()}"


def csv_text(result: SweepResult, metadata: bool = True) -> str:
    buf = io.StringIO()
    if metadata:
        buf.write(metadata_line(result) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    # nothing requested: header only
    records = result.records if result.spec.quantities else ()
    for r in records:
        w.writerow([_fmt(r.D), _fmt(r.theta), _fmt(r.kappaT)] + [_fmt(r.get(q)) for q in CSV_COLUMNS[3:]])
    return buf.getvalue()


def emit_csv(result: SweepResult, path, metadata: bool = True) -> Path:
    """Write ``result`` as CSV; 17 significant digits so values round-trip exactly."""
    path = Path(path)
    text = csv_text(result, metadata)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return path


def read_csv(path) -> list[dict]:
    """Parse an emitted CSV back into dicts (empty fields become None)."""
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    rows = []
    for row in csv.DictReader(lines):
        rows.append({k: (float(v) if v != "" else None) for k, v in row.items()})
    return rows


# -- SVG ----------------------------------------------------------------------

W, H = 640, 440
MARGIN = dict(left=70, right=30, top=40, bottom=55)
SERIES_COLORS = ("#1f4e79", "#c0392b", "#27ae60", "#8e44ad", "#d68910")
AXIS_LABELS = {"D": "D", "theta": "theta (rad)", "kappaT": "kappa T"}


def colormap(t: float) -> str:
    t = min(max(float(t), 0.0), 1.0) * (len(VIRIDIS) - 1)
    i = min(int(t), len(VIRIDIS) - 2)
    f = t - i
    rgb = [round(a + (b - a) * f) for a, b in zip(VIRIDIS[i], VIRIDIS[i + 1])]
    return "#%02x%02x%02x" % tuple(rgb)


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi == lo:
        return np.array([lo])
    return np.linspace(lo, hi, n)


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


class _Canvas:
    def __init__(self, title: str, width: int = W):
        self.width = width
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{H}" viewBox="0 0 {width} {H}" '
            'font-family="sans-serif" font-size="12">',
            f'<rect x="0" y="0" width="{width}" height="{H}" fill="white"/>',
            f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        ]

    def add(self, s: str):
        self.parts.append(s)

    def text(self, x, y, s, anchor="middle", extra=""):
        self.add(f'<text x="{x:.2f}" y="{y:.2f}" text-anchor="{anchor}"{extra}>{escape(s)}</text>')

    def finish(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _frame(c: _Canvas, x0, x1, y0, y1, xlo, xhi, ylo, yhi, xlabel, ylabel):
    px = lambda v: x0 + (v - xlo) / ((xhi - xlo) or 1) * (x1 - x0)
    py = lambda v: y1 - (v - ylo) / ((yhi - ylo) or 1) * (y1 - y0)
    c.add(f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" fill="none" stroke="black"/>')
    for t in _ticks(xlo, xhi):
        x = px(t)
        c.add(f'<line x1="{x:.2f}" y1="{y1}" x2="{x:.2f}" y2="{y1 + 5}" stroke="black"/>')
        c.text(x, y1 + 18, _tick_label(t))
    for t in _ticks(ylo, yhi):
        y = py(t)
        c.add(f'<line x1="{x0 - 5}" y1="{y:.2f}" x2="{x0}" y2="{y:.2f}" stroke="black"/>')
        c.text(x0 - 8, y + 4, _tick_label(t), anchor="end")
    c.text((x0 + x1) / 2, H - 12, xlabel)
    c.text(16, (y0 + y1) / 2, ylabel, extra=f' transform="rotate(-90 16 {(y0 + y1) / 2:.2f})"')
    return px, py


def _default_quantities(result: SweepResult, heatmap: bool) -> tuple[str, ...]:
    q = result.spec.quantities
    if "snr" in q:
        return ("snr",)
    pg = tuple(x for x in q if x.startswith("pg"))
    if not pg:
        raise UnsupportedShape("result carries no plottable quantity")
    return pg[:1] if heatmap else pg


def _grid(result: SweepResult, name: str) -> np.ndarray:
    return result.column(name).reshape(result.shape)


def render_svg(result: SweepResult, quantities=None, title: str | None = None) -> str:
    spec = result.spec
    varying = spec.varying_axes()
    if len(varying) not in (1, 2):
        raise UnsupportedShape(f"need 1 or 2 varying axes for SVG, got {len(varying)}: {varying}")
    title = title or spec.title or "catsense sweep"
    quantities = tuple(quantities or _default_quantities(result, len(varying) == 2))
    if len(varying) == 1:
        return _line_plot(result, varying[0], quantities, title)
    return _heatmap(result, varying, quantities[0], title)


def _line_plot(result, axis, quantities, title) -> str:
    c = _Canvas(title)
    x = result.column(axis)
    series = [(q, result.column(q)) for q in quantities]
    finite = np.concatenate([s[np.isfinite(s)] for _, s in series]) if series else np.array([0.0])
    ylo, yhi = float(finite.min()), float(finite.max())
    if ylo == yhi:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    x0, x1 = MARGIN["left"], W - MARGIN["right"]
    y0, y1 = MARGIN["top"], H - MARGIN["bottom"]
    px, py = _frame(c, x0, x1, y0, y1, float(x.min()), float(x.max()), ylo, yhi, AXIS_LABELS[axis],
                    ", ".join(quantities))
    for k, (name, ys) in enumerate(series):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, ys) if np.isfinite(b))
        color = SERIES_COLORS[k % len(SERIES_COLORS)]
        c.add(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        c.text(x1 - 8, y0 + 16 + 15 * k, name, anchor="end", extra=f' fill="{color}"')
    return c.finish()


def _heatmap(result, varying, quantity, title) -> str:
    c = _Canvas(title, width=W + 80)
    grid = np.squeeze(_grid(result, quantity))
    xs = np.unique(result.column(varying[0]))
    ys = np.unique(result.column(varying[1]))
    grid = grid.reshape(xs.size, ys.size)
    finite = grid[np.isfinite(grid)]
    vlo, vhi = float(finite.min()), float(finite.max())
    span = (vhi - vlo) or 1.0
    x0, x1 = MARGIN["left"], W - MARGIN["right"]
    y0, y1 = MARGIN["top"], H - MARGIN["bottom"]
    cw, ch = (x1 - x0) / xs.size, (y1 - y0) / ys.size
    for i in range(xs.size):
        for j in range(ys.size):
            v = grid[i, j]
            fill = colormap((v - vlo) / span) if np.isfinite(v) else "#cccccc"
            c.add(
                f'<rect x="{x0 + i * cw:.2f}" y="{y1 - (j + 1) * ch:.2f}" width="{cw + 0.05:.2f}" '
                f'height="{ch + 0.05:.2f}" fill="{fill}"/>'
            )
    # cell centres map onto the tick positions
    xlo, xhi = xs[0] - (xs[-1] - xs[0]) / (2 * (xs.size - 1)), xs[-1] + (xs[-1] - xs[0]) / (2 * (xs.size - 1))
    ylo, yhi = ys[0] - (ys[-1] - ys[0]) / (2 * (ys.size - 1)), ys[-1] + (ys[-1] - ys[0]) / (2 * (ys.size - 1))
    _frame(c, x0, x1, y0, y1, xlo, xhi, ylo, yhi, AXIS_LABELS[varying[0]], AXIS_LABELS[varying[1]])
    bx = W + 5
    steps = 50
    for k in range(steps):
        c.add(
            f'<rect x="{bx}" y="{y1 - (k + 1) * (y1 - y0) / steps:.2f}" width="18" '
            f'height="{(y1 - y0) / steps + 0.05:.2f}" fill="{colormap(k / (steps - 1))}"/>'
        )
    c.add(f'<rect x="{bx}" y="{y0}" width="18" height="{y1 - y0}" fill="none" stroke="black"/>')
    for t in _ticks(vlo, vhi):
        c.text(bx + 24, y1 - (t - vlo) / span * (y1 - y0) + 4, _tick_label(t), anchor="start")
    c.text(bx + 9, y0 - 8, quantity)
    return c.finish()


def emit_svg(result: SweepResult, path, quantities=None, title: str | None = None) -> Path:
    text = render_svg(result, quantities, title)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write SVG to {path}: {exc}") from exc
    return path
