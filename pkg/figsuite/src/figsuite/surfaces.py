"""Grid-surface and power-law rendering.

render_grid_surfaces dispatches on the CSV's columns: strategy grids
(noise or control-error sweeps) become overlaid log-log-log surfaces
with the protection crossover contour drawn on the base plane, and
power-law tables become slope-annotated log-log line plots.
"""
from __future__ import annotations

import numpy as np

from .csvio import SchemaError, read_csv, require_columns
from .style import new_figure, save

NOISE_AXES = ("delta_over_chi", "Delta_over_chi")
CONTROL_AXES = ("norm_ratio", "eps")
GRID_VALUE_COLUMNS = ("strategy", "mean_distance", "mean_infidelity")
POWERLAW_COLUMNS = ("j", "eta2", "eta3", "deviation")

STRATEGY_ORDER = ("nodd", "dcg_per_pulse", "dcg_per_cycle")
STRATEGY_STYLE = {
    "nodd": ("0.45", "NoDD"),
    "dcg_per_pulse": ("tab:red", "DCG per pulse"),
    "dcg_per_cycle": ("tab:green", "DCG per cycle"),
}
AXIS_LABEL = {
    "delta_over_chi": r"$\log_{10}\,\delta/\chi$",
    "Delta_over_chi": r"$\log_{10}\,\Delta/\chi$",
    "norm_ratio": r"$\log_{10}\,\|H_{\mathrm{err}}\|/\chi$",
    "eps": r"$\log_{10}\,\epsilon$",
}


def render_grid_surfaces(csv_path, out_path, fmt=None):
    """Render a strategy-comparison grid or a power-law table."""
    columns, rows, config = read_csv(csv_path)
    if set(columns) == set(POWERLAW_COLUMNS):
        return _render_powerlaw(rows, config, csv_path, out_path, fmt)
    if set(columns[:2]) == set(NOISE_AXES):
        axes = NOISE_AXES
    elif set(columns[:2]) == set(CONTROL_AXES):
        axes = CONTROL_AXES
    else:
        raise SchemaError(
            f"{csv_path}: columns {columns} match neither a strategy grid "
            f"({NOISE_AXES} or {CONTROL_AXES} + {GRID_VALUE_COLUMNS}) nor a "
            f"power-law table {POWERLAW_COLUMNS}"
        )
    require_columns(columns, axes + GRID_VALUE_COLUMNS, csv_path)
    return _render_grid(rows, axes, csv_path, out_path, fmt)


def _render_grid(rows, axes, csv_path, out_path, fmt):
    xs = np.array(sorted({r[axes[0]] for r in rows}), dtype=float)
    ys = np.array(sorted({r[axes[1]] for r in rows}), dtype=float)
    strategies = [s for s in STRATEGY_ORDER if any(r["strategy"] == s for r in rows)]
    extra = sorted({r["strategy"] for r in rows} - set(strategies))
    strategies += extra

    surfaces = {s: np.full((len(ys), len(xs)), np.nan) for s in strategies}
    for r in rows:
        i = np.searchsorted(ys, r[axes[1]])
        k = np.searchsorted(xs, r[axes[0]])
        surfaces[r["strategy"]][i, k] = r["mean_distance"]
    for s, z in surfaces.items():
        if np.isnan(z).any():
            raise ValueError(f"{csv_path}: incomplete grid for strategy {s!r}")

    lx, ly = np.log10(xs), np.log10(ys)
    mx, my = np.meshgrid(lx, ly)
    fig = new_figure((6.0, 4.5))
    ax = fig.add_subplot(111, projection="3d")
    handles, names = [], []
    zmin = min(np.log10(z).min() for z in surfaces.values())
    for s in strategies:
        color, label = STRATEGY_STYLE.get(s, ("tab:blue", s))
        ax.plot_surface(mx, my, np.log10(surfaces[s]), color=color,
                        alpha=0.7, linewidth=0.2, edgecolor="k", shade=False)
        handles.append(__import__("matplotlib").patches.Patch(color=color))
        names.append(label)

    crossover = False
    dcg = [s for s in strategies if s.startswith("dcg")]
    if "nodd" in surfaces and dcg:
        best = np.minimum.reduce([np.log10(surfaces[s]) for s in dcg])
        gap = best - np.log10(surfaces["nodd"])
        if gap.min() < 0 < gap.max() and len(xs) > 1 and len(ys) > 1:
            ax.contour(mx, my, gap, levels=[0.0], colors="k",
                       linewidths=1.5, offset=zmin - 0.5, zdir="z")
            ax.text2D(0.02, 0.02, "black contour: protection crossover",
                      transform=ax.transAxes)
            crossover = True

    ax.set_xlabel(AXIS_LABEL.get(axes[0], axes[0]))
    ax.set_ylabel(AXIS_LABEL.get(axes[1], axes[1]))
    ax.set_zlabel(r"$\log_{10}$ mean distance")
    ax.set_zlim(zmin - 0.5, None)
    if len(strategies) > 1:
        ax.legend(handles, names, loc="upper left")
    ax.view_init(elev=22, azim=-125)
    path = save(fig, out_path, fmt)
    return {"path": path, "strategies": strategies, "crossover": crossover}


def _render_powerlaw(rows, config, csv_path, out_path, fmt):
    js = np.array([r["j"] for r in rows], dtype=float)
    slopes = config.get("slopes")
    fig = new_figure((4.5, 3.4))
    ax = fig.add_subplot(111)
    shown = {}
    for key, marker in (("eta2", "o"), ("eta3", "s")):
        vals = np.abs([r[key] for r in rows])
        if slopes and key in slopes:
            slope = float(slopes[key])
        else:
            slope = float(np.polyfit(np.log10(js), np.log10(vals), 1)[0])
        shown[key] = slope
        ax.loglog(js, vals, marker, ms=4, label=rf"$|\{'eta'}_{key[-1]}|$: slope {slope:+.3f}")
        anchor = vals[0] * (js / js[0]) ** slope
        ax.loglog(js, anchor, "-", lw=1, alpha=0.7)
    ax.set_xlabel("spin j")
    ax.set_ylabel("squeezing strength")
    ax.legend()
    path = save(fig, out_path, fmt)
    return {"path": path, "slopes": shown}
