"""Deterministic matplotlib configuration.

Byte-identical CSVs must yield pixel-identical images, so everything
that could vary between runs is pinned: the Agg backend, one bundled
font rendered as paths in SVG, a fixed hash salt for SVG element ids,
and savefig metadata stripped of dates and version strings.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg", force=True)

import matplotlib.pyplot as plt  # noqa: E402  backend must be set first

FORMATS = ("png", "svg")

RC = {
    "font.family": "DejaVu Sans",
    "font.size": 9.0,
    "mathtext.fontset": "dejavusans",
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "svg.fonttype": "path",
    "svg.hashsalt": "figsuite",
    "axes.grid": False,
}


def new_figure(figsize):
    plt.rcParams.update(RC)
    return plt.figure(figsize=figsize)


def save(fig, out_path, fmt=None):
    """Write the figure with reproducible metadata and close it."""
    out_path = str(out_path)
    if fmt is None:
        fmt = out_path.rsplit(".", 1)[-1].lower() if "." in out_path else "png"
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    if fmt == "png":
        metadata = {"Software": "figsuite"}
    else:
        metadata = {"Date": None, "Creator": "figsuite"}
    fig.savefig(out_path, format=fmt, metadata=metadata)
    plt.close(fig)
    return out_path
