"""Spike raster as a standalone SVG document.

One ``<rect class="spike ...">`` per spike, one
``<line class="trial-boundary">`` at the start of every trial and one
``<rect class="input-window">`` per input window per trial. The class names
are stable so a raster can be parsed back and counted.
"""

from __future__ import annotations

import json
from pathlib import Path
from xml.sax.saxutils import escape

from .probes import read_spike_csv

COLORS = {"ex": "#c0392b", "in": "#2c6fbb", "out": "#7d3c98"}
INPUT_COLOR = "#f39c12"
POOLS = ("ex", "in", "out")


def render_svg(pools, steps_per_trial, trials, input_windows=(), size=(900, 500), title=""):
    """``pools``: list of (name, n_neurons, steps, neuron indices)."""
    width, height = size
    left, right, top, bottom = 60, 15, 30 if title else 15, 40
    plot_w, plot_h = width - left - right, height - top - bottom
    total_steps = max(1, steps_per_trial * trials)
    total_rows = max(1, sum(n for _, n, _, _ in pools))
    dx = plot_w / total_steps
    dy = plot_h / total_rows

    def x(t):
        return left + t * dx

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect class="background" x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text class="title" x="{width / 2:.2f}" y="18" text-anchor="middle" '
                   f'font-size="13">{escape(title)}</text>')

    # input windows are shaded over the excitatory band only
    ex_rows = next((n for name, n, _, _ in pools if name == "ex"), 0)
    if ex_rows:
        for k in range(trials):
            for s, e in input_windows:
                out.append(
                    f'<rect class="input-window" x="{x(k * steps_per_trial + s):.2f}" y="{top:.2f}" '
                    f'width="{(e - s) * dx:.2f}" height="{ex_rows * dy:.2f}" '
                    f'fill="{INPUT_COLOR}" fill-opacity="0.18"/>')

    row0 = 0
    for name, n, steps, neurons in pools:
        color = COLORS.get(name, "black")
        for t, i in zip(steps, neurons):
            out.append(f'<rect class="spike spike-{name}" x="{x(t):.2f}" '
                       f'y="{top + (row0 + i) * dy:.2f}" width="{max(dx, 0.6):.2f}" '
                       f'height="{max(dy, 0.6):.2f}" fill="{color}"/>')
        if row0:
            out.append(f'<line class="pool-separator" x1="{left}" x2="{left + plot_w}" '
                       f'y1="{top + row0 * dy:.2f}" y2="{top + row0 * dy:.2f}" stroke="#999" '
                       f'stroke-dasharray="2,2"/>')
        out.append(f'<text class="pool-label" x="{left - 6}" y="{top + (row0 + n / 2) * dy:.2f}" '
                   f'text-anchor="end" font-size="11">{escape(name)}</text>')
        row0 += n

    for k in range(trials):
        out.append(f'<line class="trial-boundary" x1="{x(k * steps_per_trial):.2f}" '
                   f'x2="{x(k * steps_per_trial):.2f}" y1="{top}" y2="{top + plot_h}" '
                   f'stroke="#333" stroke-width="0.8"/>')

    # axes
    out.append(f'<line class="axis" x1="{left}" x2="{left + plot_w}" y1="{top + plot_h}" '
               f'y2="{top + plot_h}" stroke="black"/>')
    out.append(f'<line class="axis" x1="{left}" x2="{left}" y1="{top}" y2="{top + plot_h}" stroke="black"/>')
    for t in _ticks(total_steps):
        out.append(f'<text class="tick" x="{x(t):.2f}" y="{top + plot_h + 14}" '
                   f'text-anchor="middle" font-size="10">{t}</text>')
    out.append(f'<text class="axis-label" x="{left + plot_w / 2:.2f}" y="{height - 6}" '
               f'text-anchor="middle" font-size="11">time step</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _ticks(total, target=6):
    raw = total / target
    mag = 10 ** (len(str(int(raw))) - 1) if raw >= 1 else 1
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    return range(0, total + 1, step)


def raster_from_run(run_dir, pools=None):
    """SVG for a run directory; ``pools`` defaults to every exported pool."""
    run_dir = Path(run_dir)
    with open(run_dir / "parameters.json") as fh:
        doc = json.load(fh)
    p, d = doc["parameters"], doc["derived"]
    sizes = {"ex": p["reservoirExSize"], "in": d["reservoirInSize"], "out": p["outputSize"]}
    if pools is None:
        pools = [name for name in POOLS if (run_dir / f"spikes_{name}.csv").exists()]
    data = []
    for name in pools:
        if name not in sizes:
            raise ValueError(f"unknown pool {name!r}")
        path = run_dir / f"spikes_{name}.csv"
        if not path.exists():
            raise FileNotFoundError(f"{path} not found")
        steps, neurons = read_spike_csv(path)
        data.append((name, sizes[name], steps, neurons))
    return render_svg(data, p["stepsPerTrial"], p["trials"], d["inputWindows"],
                      tuple(p["plotDimensions"]), title=run_dir.name)
