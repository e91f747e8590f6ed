# app/operations/render.py
"""
Module: render

Static SVG line plots and heatmaps of sweep tables, drawn from the Jinja2
templates shipped in ``app/templates``. Geometry is computed here; the
templates only lay out the elements.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from jinja2 import Environment, FileSystemLoader, select_autoescape

from app.core.config import PACKAGE_DIR
from app.schemas.sweep import PlotSpec

logger = logging.getLogger(__name__)

TEMPLATES_DIR = PACKAGE_DIR / "templates"

WIDTH, HEIGHT = 640, 440
MARGIN = {"left": 70, "right": 110, "top": 40, "bottom": 55}
N_TICKS = 5
SERIES_COLOURS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]
# Sampled viridis stops for the heatmap scale.
PALETTE = ["#440154", "#3b528b", "#21918c", "#5ec962", "#fde725"]
MISSING_COLOUR = "#dddddd"

_environment = Environment(
    loader=FileSystemLoader(str(TEMPLATES_DIR)),
    autoescape=select_autoescape(["svg", "j2"]),
    trim_blocks=True,
    lstrip_blocks=True,
)


def _ticks(low: float, high: float) -> List[float]:
    if high == low:
        return [low]
    return [float(v) for v in np.linspace(low, high, N_TICKS)]


def _scale(low: float, high: float, start: float, stop: float):
    span = (high - low) or 1.0
    return lambda v: start + (v - low) / span * (stop - start)


def _colour(fraction: float) -> str:
    """Linear interpolation in PALETTE, fraction in [0, 1]."""
    fraction = min(max(fraction, 0.0), 1.0) * (len(PALETTE) - 1)
    k = min(int(fraction), len(PALETTE) - 2)
    t = fraction - k
    a = [int(PALETTE[k][i: i + 2], 16) for i in (1, 3, 5)]
    b = [int(PALETTE[k + 1][i: i + 2], 16) for i in (1, 3, 5)]
    return "#" + "".join(f"{round(x + t * (y - x)):02x}" for x, y in zip(a, b))


def _frame(x_range: Tuple[float, float], y_range: Tuple[float, float]) -> Dict:
    left, top = MARGIN["left"], MARGIN["top"]
    right, bottom = WIDTH - MARGIN["right"], HEIGHT - MARGIN["bottom"]
    sx = _scale(*x_range, left, right)
    sy = _scale(*y_range, bottom, top)
    return {
        "left": left, "right": right, "top": top, "bottom": bottom,
        "sx": sx, "sy": sy,
        "x_ticks": [(sx(v), f"{v:.3g}") for v in _ticks(*x_range)],
        "y_ticks": [(sy(v), f"{v:.3g}") for v in _ticks(*y_range)],
    }


def render_line(frame: pd.DataFrame, plot: PlotSpec) -> str:
    """One polyline per value of ``plot.series`` (or a single curve); missing values break the curve."""
    data = frame[[plot.x, plot.y] + ([plot.series] if plot.series else [])].copy()
    data[plot.y] = pd.to_numeric(data[plot.y], errors="coerce")
    valid = data.dropna(subset=[plot.y])
    if valid.empty:
        raise ValueError(f"column '{plot.y}' has no values to plot")
    x_range = (float(data[plot.x].min()), float(data[plot.x].max()))
    y_range = (min(0.0, float(valid[plot.y].min())), float(valid[plot.y].max()))
    geometry = _frame(x_range, y_range)

    groups = data.groupby(plot.series, sort=False) if plot.series else [(None, data)]
    series = []
    for index, (key, group) in enumerate(groups):
        segments: List[List[Tuple[float, float]]] = [[]]
        for x, y in zip(group[plot.x], group[plot.y]):
            if pd.isna(y):
                if segments[-1]:
                    segments.append([])
                continue
            segments[-1].append((geometry["sx"](float(x)), geometry["sy"](float(y))))
        series.append({
            "label": f"{plot.series} = {key:.4g}" if plot.series else plot.y,
            "colour": SERIES_COLOURS[index % len(SERIES_COLOURS)],
            "segments": [" ".join(f"{px:.2f},{py:.2f}" for px, py in seg) for seg in segments if seg],
        })

    template = _environment.get_template("line.svg.j2")
    return template.render(
        width=WIDTH, height=HEIGHT, title=plot.title or f"{plot.y} vs {plot.x}",
        x_label=plot.x, y_label=plot.y, series=series, **geometry,
    )


def render_heatmap(frame: pd.DataFrame, plot: PlotSpec) -> str:
    """Cells on the (x, y) grid coloured by ``plot.value``; missing values are grey."""
    values = pd.to_numeric(frame[plot.value], errors="coerce")
    xs = sorted(frame[plot.x].unique())
    ys = sorted(frame[plot.y].unique())
    finite = values.dropna()
    low, high = (float(finite.min()), float(finite.max())) if not finite.empty else (0.0, 1.0)
    geometry = _frame((float(xs[0]), float(xs[-1])), (float(ys[0]), float(ys[-1])))

    width = (geometry["right"] - geometry["left"]) / len(xs)
    height = (geometry["bottom"] - geometry["top"]) / len(ys)
    x_index = {x: k for k, x in enumerate(xs)}
    y_index = {y: k for k, y in enumerate(ys)}
    cells = []
    for x, y, v in zip(frame[plot.x], frame[plot.y], values):
        colour = MISSING_COLOUR if pd.isna(v) else _colour((v - low) / ((high - low) or 1.0))
        cells.append({
            "x": geometry["left"] + x_index[x] * width,
            "y": geometry["bottom"] - (y_index[y] + 1) * height,
            "w": width, "h": height, "colour": colour,
        })
    legend = [
        {"y": geometry["bottom"] - (k + 1) * (geometry["bottom"] - geometry["top"]) / 20,
         "colour": _colour(k / 19)}
        for k in range(20)
    ]

    template = _environment.get_template("heatmap.svg.j2")
    return template.render(
        width=WIDTH, height=HEIGHT, title=plot.title or f"{plot.value} over ({plot.x}, {plot.y})",
        x_label=plot.x, y_label=plot.y, value_label=plot.value, cells=cells, legend=legend,
        legend_step=(geometry["bottom"] - geometry["top"]) / 20,
        value_low=f"{low:.3g}", value_high=f"{high:.3g}", **geometry,
    )


def render(frame: pd.DataFrame, plot: PlotSpec, path: Optional[Path] = None) -> str:
    """Render a plot; write it to ``path`` when given."""
    svg = render_heatmap(frame, plot) if plot.kind == "heatmap" else render_line(frame, plot)
    if path is not None:
        Path(path).write_text(svg, encoding="utf-8")
        logger.info("rendered %s plot to %s", plot.kind, path)
    return svg
