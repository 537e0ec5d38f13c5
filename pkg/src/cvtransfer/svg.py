"""Tiny SVG emitters for line plots and heatmaps (no plotting dependency)."""

from xml.sax.saxutils import escape

import numpy as np

_WIDTH, _HEIGHT = 640, 420
_MARGIN = (70, 30, 40, 60)  # left, right, top, bottom

# a few anchors of a perceptually ordered dark-blue -> yellow ramp
_RAMP = np.array(
    [
        [68, 1, 84],
        [59, 82, 139],
        [33, 145, 140],
        [94, 201, 98],
        [253, 231, 37],
    ],
    dtype=float,
)

_LINE_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _color(t):
    t = float(np.clip(t, 0.0, 1.0)) * (len(_RAMP) - 1)
    i = min(int(t), len(_RAMP) - 2)
    c = _RAMP[i] + (t - i) * (_RAMP[i + 1] - _RAMP[i])
    return "#%02x%02x%02x" % tuple(int(round(v)) for v in c)


def _frame(title, xlabel, ylabel, xr, yr):
    left, right, top, bottom = _MARGIN
    w, h = _WIDTH - left - right, _HEIGHT - top - bottom
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="black"/>',
        f'<text x="{left + w / 2}" y="{_HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="18" y="{top + h / 2}" text-anchor="middle" transform="rotate(-90 18 {top + h / 2})">{escape(ylabel)}</text>',
    ]
    for frac in np.linspace(0, 1, 5):
        x = left + frac * w
        y = top + h - frac * h
        xv = xr[0] + frac * (xr[1] - xr[0])
        yv = yr[0] + frac * (yr[1] - yr[0])
        parts.append(f'<text x="{x:.1f}" y="{top + h + 16}" text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    return parts, (left, top, w, h)


def _range(values):
    lo, hi = float(np.nanmin(values)), float(np.nanmax(values))
    if hi == lo:
        hi = lo + 1.0
    return lo, hi


def line_plot(x, series, title="", xlabel="", ylabel=""):
    """SVG text for one or more curves sharing the abscissa ``x``.

    ``series`` maps a legend label to a sequence of ordinates.
    """
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    xr = _range(x)
    yr = _range(np.concatenate(list(ys.values()))) if ys else (0.0, 1.0)
    parts, (left, top, w, h) = _frame(title, xlabel, ylabel, xr, yr)
    for idx, (label, y) in enumerate(ys.items()):
        px = left + (x - xr[0]) / (xr[1] - xr[0]) * w
        py = top + h - (y - yr[0]) / (yr[1] - yr[0]) * h
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        color = _LINE_COLORS[idx % len(_LINE_COLORS)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(
            f'<text x="{left + w - 6}" y="{top + 16 + 14 * idx}" text-anchor="end" fill="{color}">{escape(str(label))}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def heatmap(xs, ys, grid, title="", xlabel="", ylabel=""):
    """SVG text for ``grid[i, j]`` drawn at ``(xs[j], ys[i])``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    grid = np.asarray(grid, dtype=float)
    parts, (left, top, w, h) = _frame(title, xlabel, ylabel, _range(xs), _range(ys))
    lo, hi = _range(grid)
    cw, ch = w / grid.shape[1], h / grid.shape[0]
    for i in range(grid.shape[0]):
        for j in range(grid.shape[1]):
            val = grid[i, j]
            fill = "#cccccc" if not np.isfinite(val) else _color((val - lo) / (hi - lo))
            y = top + h - (i + 1) * ch
            parts.append(
                f'<rect x="{left + j * cw:.2f}" y="{y:.2f}" width="{cw + 0.05:.2f}" height="{ch + 0.05:.2f}" fill="{fill}"/>'
            )
    parts.append(f'<text x="{_WIDTH - 8}" y="{top - 6}" text-anchor="end">range [{lo:.3g}, {hi:.3g}]</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
