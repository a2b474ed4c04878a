"""Multipole-trace rendering: per-step (L, M) power heatmap."""
from __future__ import annotations

import numpy as np

from .csvio import read_csv, require_columns
from .style import new_figure, save

TRACE_COLUMNS = ("step", "label", "L", "M", "power")

# powers span from O(1) monopole down to numerical zero; clip the log
# scale at a floor well below anything physically meaningful
POWER_FLOOR = 1e-16


def render_multipole_trace(csv_path, out_path, fmt=None):
    """Render a protocol's per-step multipole content.

    One column per pulse step (initial state first), one row per (L, M)
    pair ordered by rank, colored by log10 of the squared moment.
    Returns a summary dict with the output path and the per-step maxima
    of the rank range 1..t, handy for checking emptiness claims.
    """
    columns, rows, config = read_csv(csv_path)
    require_columns(columns, TRACE_COLUMNS, csv_path)

    steps = sorted({r["step"] for r in rows})
    labels = {}
    pairs = sorted({(r["L"], r["M"]) for r in rows})
    index = {p: i for i, p in enumerate(pairs)}
    grid = np.full((len(pairs), len(steps)), np.nan)
    for r in rows:
        grid[index[(r["L"], r["M"])], steps.index(r["step"])] = r["power"]
        labels[r["step"]] = r["label"]
    if np.isnan(grid).any():
        holes = int(np.isnan(grid).sum())
        raise ValueError(f"{csv_path}: {holes} missing (step, L, M) cells")

    fig = new_figure((1.2 + 0.6 * len(steps), 0.8 + 0.11 * len(pairs)))
    ax = fig.add_subplot(111)
    img = ax.imshow(
        np.log10(np.maximum(grid, POWER_FLOOR)),
        aspect="auto",
        origin="lower",
        cmap="viridis",
        vmin=np.log10(POWER_FLOOR),
        vmax=0.0,
        interpolation="nearest",
    )
    ax.set_xticks(range(len(steps)))
    ax.set_xticklabels([labels[s] for s in steps])
    ranks = [ell for ell, _ in pairs]
    ticks = [ranks.index(ell) for ell in sorted(set(ranks))]
    ax.set_yticks(ticks)
    ax.set_yticklabels([f"L={pairs[i][0]}" for i in ticks])
    ax.set_xlabel("pulse step")
    ax.set_ylabel("multipole (L, M), M ascending within L")
    cbar = fig.colorbar(img, ax=ax)
    cbar.set_label(r"$\log_{10}\,|\rho_{LM}|^2$")
    path = save(fig, out_path, fmt)

    final = steps[-1]
    rank_max = {}
    for (ell, _), i in index.items():
        if ell >= 1:
            col = grid[i, steps.index(final)]
            rank_max[ell] = max(rank_max.get(ell, 0.0), col)
    return {
        "path": path,
        "steps": [labels[s] for s in steps],
        "pairs": len(pairs),
        "final_rank_max": rank_max,
    }
