"""Static SVG rendering for run outputs.

Plots are plain hand-assembled SVG so output is byte-deterministic, diffable
in tests, and dependency-free. Kinds:

* ``exploitability``: per-iteration mean line with a min/max band over seeds,
  from one results.csv per seed.
* ``trajectories``: the plane game's hump circles plus one polyline per
  oracle run, from trajectories.csv files.
* ``reward_curves``: mean and band of oracle learning curves.
* ``kl_tiles``: one colored tile per (iteration, method) from kl_compare.csv.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .engine import RESULTS_VERSION
from .games.ntmg import NtmgConfig

WIDTH, HEIGHT = 640, 480
MARGIN = 56

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


class PlotError(Exception):
    pass


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _read_csv(path: str, required: list[str], version_comment=None):
    rows = []
    with open(path, newline="") as fh:
        first = fh.readline()
        if first.startswith("#"):
            if (version_comment is not None
                    and first.strip() != f"# {version_comment}"):
                raise PlotError(f"{path}: unsupported results version "
                                f"{first.strip()!r}")
            header_line = fh.readline()
        else:
            if version_comment is not None:
                raise PlotError(f"{path}: missing version header")
            header_line = first
        header = next(csv.reader([header_line])) if header_line else []
        for col in required:
            if col not in header:
                raise PlotError(f"{path}: missing column {col!r}")
        reader = csv.reader(fh)
        for i, row in enumerate(reader):
            if not row:
                continue
            rows.append(dict(zip(header, row)))
    return rows


def _float_cell(row, path, idx, column):
    raw = row.get(column, "")
    if raw == "":
        return None
    try:
        return float(raw)
    except ValueError:
        raise PlotError(f"{path}: row {idx} column {column!r} is not a number")


def _axes(x_label: str, y_label: str) -> list[str]:
    x0, y0 = MARGIN, HEIGHT - MARGIN
    x1, y1 = WIDTH - MARGIN, MARGIN
    return [
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 14}" text-anchor="middle" '
        f'font-size="13">{x_label}</text>',
        f'<text x="16" y="{(y0 + y1) // 2}" text-anchor="middle" '
        f'font-size="13" transform="rotate(-90 16 {(y0 + y1) // 2})">'
        f'{y_label}</text>',
    ]


def _document(body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>']
                     + body + ["</svg>"]) + "\n"


class _Scale:
    def __init__(self, xmin, xmax, ymin, ymax):
        self.xmin, self.xmax = xmin, xmax
        self.ymin, self.ymax = ymin, ymax

    def x(self, v):
        span = self.xmax - self.xmin or 1.0
        return MARGIN + (v - self.xmin) / span * (WIDTH - 2 * MARGIN)

    def y(self, v):
        span = self.ymax - self.ymin or 1.0
        return HEIGHT - MARGIN - (v - self.ymin) / span * (HEIGHT - 2 * MARGIN)


def _ticks(scale: _Scale) -> list[str]:
    parts = []
    for frac in (0.0, 0.5, 1.0):
        xv = scale.xmin + frac * (scale.xmax - scale.xmin)
        yv = scale.ymin + frac * (scale.ymax - scale.ymin)
        parts.append(f'<text x="{_fmt(scale.x(xv))}" y="{HEIGHT - MARGIN + 18}" '
                     f'text-anchor="middle" font-size="11">{_fmt(xv)}</text>')
        parts.append(f'<text x="{MARGIN - 6}" y="{_fmt(scale.y(yv) + 4)}" '
                     f'text-anchor="end" font-size="11">{_fmt(yv)}</text>')
    return parts


def _series_from_results(paths):
    """Per-seed exploitability series keyed by iteration."""
    series = []
    for path in paths:
        rows = _read_csv(path, ["iteration", "exploitability",
                                "approx_exploitability"],
                         version_comment=RESULTS_VERSION)
        points = {}
        for idx, row in enumerate(rows):
            it = _float_cell(row, path, idx, "iteration")
            value = _float_cell(row, path, idx, "exploitability")
            if value is None:
                value = _float_cell(row, path, idx, "approx_exploitability")
            if it is not None and value is not None:
                points[int(it)] = value
        series.append(points)
    return series


def _band_plot(series, x_label, y_label, line_color="#1f77b4"):
    body = _axes(x_label, y_label)
    iterations = sorted(set().union(*[set(s) for s in series])) if series else []
    iterations = [i for i in iterations
                  if all(i in s for s in series if s)] if series else []
    if not iterations or not any(series):
        return _document(body)
    means, lows, highs = [], [], []
    for it in iterations:
        vals = [s[it] for s in series if it in s]
        means.append(float(np.mean(vals)))
        lows.append(min(vals))
        highs.append(max(vals))
    ymin = min(lows + [0.0])
    ymax = max(highs) or 1.0
    scale = _Scale(iterations[0], iterations[-1], ymin, ymax)
    band = [(scale.x(i), scale.y(h)) for i, h in zip(iterations, highs)]
    band += [(scale.x(i), scale.y(l))
             for i, l in zip(reversed(iterations), reversed(lows))]
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in band)
    body.append(f'<polygon points="{pts}" fill="{line_color}" '
                'fill-opacity="0.2" stroke="none"/>')
    line = " ".join(f"{_fmt(scale.x(i))},{_fmt(scale.y(m))}"
                    for i, m in zip(iterations, means))
    body.append(f'<polyline points="{line}" fill="none" '
                f'stroke="{line_color}" stroke-width="1.5"/>')
    body.extend(_ticks(scale))
    return _document(body)


def _render_exploitability(inputs):
    return _band_plot(_series_from_results(inputs), "iteration",
                      "exploitability")


def _render_reward_curves(inputs):
    series = []
    for path in inputs:
        rows = _read_csv(path, ["episode", "mean_reward_window"])
        points = {}
        for idx, row in enumerate(rows):
            ep = _float_cell(row, path, idx, "episode")
            val = _float_cell(row, path, idx, "mean_reward_window")
            if ep is not None and val is not None:
                points[int(ep)] = val
        series.append(points)
    return _band_plot(series, "episode", "mean reward", line_color="#d62728")


def _render_trajectories(inputs, ntmg: NtmgConfig):
    bound = ntmg.plane_bound
    # Equal x/y scale so data-space containment survives in pixel space.
    scale = _Scale(-bound, bound, -bound, bound)
    body = _axes("x", "y")
    for k, center in enumerate(ntmg.centers()):
        r_px = ntmg.gaussian_sigma / (2 * bound) * (WIDTH - 2 * MARGIN)
        body.append(f'<circle cx="{_fmt(scale.x(center[0]))}" '
                    f'cy="{_fmt(scale.y(center[1]))}" r="{_fmt(r_px)}" '
                    'fill="none" stroke="#555555" stroke-width="1"/>')
    color_idx = 0
    for path in inputs:
        rows = _read_csv(path, ["iteration", "player", "step", "x", "y"])
        polylines: dict[tuple, list] = {}
        for idx, row in enumerate(rows):
            it = _float_cell(row, path, idx, "iteration")
            player = _float_cell(row, path, idx, "player")
            x = _float_cell(row, path, idx, "x")
            y = _float_cell(row, path, idx, "y")
            if None in (it, player, x, y):
                raise PlotError(f"{path}: row {idx} has empty cells")
            polylines.setdefault((int(it), int(player)), []).append((x, y))
        for key in sorted(polylines):
            pts = " ".join(f"{_fmt(scale.x(x))},{_fmt(scale.y(y))}"
                           for x, y in polylines[key])
            color = _COLORS[color_idx % len(_COLORS)]
            body.append(f'<polyline points="{pts}" fill="none" '
                        f'stroke="{color}" stroke-width="1" '
                        'stroke-opacity="0.8"/>')
        color_idx += 1
    return _document(body)


def _kl_color(value: float, vmax: float) -> str:
    frac = 0.0 if vmax <= 0 else min(max(value / vmax, 0.0), 1.0)
    red = int(round(255 * frac))
    blue = int(round(255 * (1 - frac)))
    return f"rgb({red},80,{blue})"


def _render_kl_tiles(inputs):
    rows = []
    for path in inputs:
        for idx, row in enumerate(_read_csv(path, ["iteration", "player",
                                                   "kl_fusion", "kl_inherit",
                                                   "kl_scratch"])):
            it = _float_cell(row, path, idx, "iteration")
            vals = [_float_cell(row, path, idx, c)
                    for c in ("kl_fusion", "kl_inherit", "kl_scratch")]
            if it is not None and None not in vals:
                rows.append((int(it), vals))
    body = _axes("iteration", "method")
    if not rows:
        return _document(body)
    # Average over players per iteration.
    by_iter: dict[int, list] = {}
    for it, vals in rows:
        by_iter.setdefault(it, []).append(vals)
    iterations = sorted(by_iter)
    grid = {it: np.mean(by_iter[it], axis=0) for it in iterations}
    vmax = max(float(np.max(v)) for v in grid.values())
    tile_w = (WIDTH - 2 * MARGIN) / max(len(iterations), 1)
    tile_h = (HEIGHT - 2 * MARGIN) / 3
    labels = ["fusion", "inherit", "scratch"]
    for row_idx, label in enumerate(labels):
        y = MARGIN + row_idx * tile_h
        body.append(f'<text x="{MARGIN - 6}" y="{_fmt(y + tile_h / 2)}" '
                    f'text-anchor="end" font-size="11">{label}</text>')
        for col, it in enumerate(iterations):
            x = MARGIN + col * tile_w
            color = _kl_color(float(grid[it][row_idx]), vmax)
            body.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" '
                        f'width="{_fmt(tile_w)}" height="{_fmt(tile_h)}" '
                        f'fill="{color}" stroke="white" stroke-width="0.5">'
                        f'<title>iter {it} {label}: '
                        f'{grid[it][row_idx]:.6f}</title></rect>')
    return _document(body)


RENDER_KINDS = ("exploitability", "trajectories", "reward_curves", "kl_tiles")


def render_svg(kind: str, inputs: list[str], out_path: str,
               ntmg: NtmgConfig | None = None) -> str:
    """Render one plot kind from input CSVs to a standalone SVG file."""
    if kind == "exploitability":
        text = _render_exploitability(inputs)
    elif kind == "trajectories":
        text = _render_trajectories(inputs, ntmg or NtmgConfig())
    elif kind == "reward_curves":
        text = _render_reward_curves(inputs)
    elif kind == "kl_tiles":
        text = _render_kl_tiles(inputs)
    else:
        raise PlotError(f"unknown plot kind {kind!r}; valid: {RENDER_KINDS}")
    out_dir = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(out_dir, exist_ok=True)
    with open(out_path, "w") as fh:
        fh.write(text)
    return out_path
