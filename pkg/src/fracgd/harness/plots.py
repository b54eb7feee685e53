"""Minimal standalone SVG line plots with a logarithmic y axis.

Plots are rebuilt from a run directory's CSV files alone (``summary.csv``
names the traces and carries ``f*``), so :func:`plot_directory` can
regenerate them offline.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Optional
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=160, top=30, bottom=50)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
METRICS = {
    "f_gap": "f - f*",
    "grad_norm_2": "||grad f||",
    "dist_sq_to_opt": "||x - x*||^2",
    "eta_t": "step size",
}


def read_column(path: Path, column: str, f_opt: Optional[float] = None) -> list[tuple[int, float]]:
    """``(t, value)`` pairs with values in [1e-300, inf); ``f_gap`` subtracts ``f_opt``."""
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            src = "f" if column == "f_gap" else column
            raw = row.get(src, "")
            if raw == "":
                continue
            v = float(raw)
            if column == "f_gap":
                if f_opt is None:
                    return []
                v -= f_opt
            if v >= 1e-300 and math.isfinite(v):
                out.append((int(row["t"]), v))
    return out


def _decade_ticks(lo: float, hi: float) -> list[int]:
    a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
    step = max(1, (b - a) // 8)
    return list(range(a, b + 1, step))


def line_plot_svg(series: dict[str, list[tuple[int, float]]], title: str, ylabel: str) -> str:
    pts = [v for s in series.values() for _, v in s]
    ts = [t for s in series.values() for t, _ in s]
    left, right, top, bottom = MARGIN["left"], MARGIN["right"], MARGIN["top"], MARGIN["bottom"]
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    if not pts:
        parts.append(f'<text x="{left}" y="{top + 20}">no positive data</text></svg>')
        return "\n".join(parts) + "\n"
    ylo, yhi = min(pts), max(pts)
    if ylo == yhi:
        ylo, yhi = ylo / 10, yhi * 10
    ticks = _decade_ticks(ylo, yhi)
    lo, hi = 10.0 ** ticks[0], 10.0 ** ticks[-1]
    tmax = max(ts) or 1

    def px(t):
        return left + pw * t / tmax

    def py(v):
        return top + ph * (1 - (math.log10(v) - math.log10(lo)) / (math.log10(hi) - math.log10(lo)))

    parts.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for k in ticks:
        y = py(10.0**k)
        parts.append(f'<line x1="{left}" y1="{y:.1f}" x2="{left + pw}" y2="{y:.1f}" stroke="#ddd"/>')
        parts.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">1e{k}</text>')
    for t in (0, tmax // 2, tmax):
        parts.append(f'<text x="{px(t):.1f}" y="{top + ph + 18}" text-anchor="middle">{t}</text>')
    parts.append(f'<text x="{left + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">iteration</text>')
    parts.append(
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    for i, (name, s) in enumerate(series.items()):
        color = COLORS[i % len(COLORS)]
        if s:
            path = " ".join(f"{px(t):.2f},{py(v):.2f}" for t, v in s)
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
        ly = top + 16 * (i + 1)
        parts.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 30}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{left + pw + 35}" y="{ly}">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_directory(out_dir) -> list[Path]:
    """One SVG per metric, one line per trace listed in ``summary.csv``."""
    out_dir = Path(out_dir)
    runs = []
    with (out_dir / "summary.csv").open(newline="") as fh:
        for row in csv.DictReader(fh):
            f_opt = float(row["f_opt"]) if row.get("f_opt") else None
            runs.append((row["method"], out_dir / row["trace_file"], f_opt))
    files = []
    for metric, label in METRICS.items():
        series = {name: read_column(p, metric, f_opt) for name, p, f_opt in runs}
        if not any(series.values()):
            continue
        path = out_dir / f"{metric}.svg"
        path.write_text(line_plot_svg(series, f"{label} by iteration", label))
        files.append(path)
    return files
