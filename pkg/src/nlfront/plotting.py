"""Static figures rendered next to the CSV outputs."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["PARAMS", "read_csv", "plot_series", "plot_eigen", "plot_profiles", "PLOTSCRIPT"]

golden = (np.sqrt(5) - 1.0) / 2.0
fig_width = 5.0

PARAMS = {
    "figure.figsize": (fig_width, fig_width * golden),
    "figure.dpi": 150,
    "font.size": 9,
    "axes.labelsize": 10,
    "axes.linewidth": 0.6,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "lines.linewidth": 1.2,
    "savefig.bbox": "tight",
}


def read_csv(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {}
    for j, name in enumerate(header):
        try:
            cols[name] = np.array([float(r[j]) for r in body])
        except ValueError:
            cols[name] = np.array([r[j] for r in body])
    return cols


def plot_series(series_csv, out_png) -> Path:
    """Front positions and peak density against time."""
    s = read_csv(series_csv)
    with plt.rc_context(PARAMS):
        fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True)
        ax1.plot(s["t"], s["h"], label="h(t)")
        ax1.plot(s["t"], s["g"], label="g(t)")
        ax1.set_ylabel("front position")
        ax1.legend(loc="best")
        ax2.plot(s["t"], s["sup_u"], color="k")
        ax2.set_ylabel("sup u")
        ax2.set_xlabel("t")
        fig.savefig(out_png)
        plt.close(fig)
    return Path(out_png)


def plot_eigen(eigen_csv, out_png) -> Path:
    e = read_csv(eigen_csv)
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots()
        ax.plot(e["l"], e["lambda_p"], "o-")
        ax.axhline(0.0, color="0.6", lw=0.6)
        ax.set_xlabel("half-length l")
        ax.set_ylabel(r"$\lambda_p$")
        fig.savefig(out_png)
        plt.close(fig)
    return Path(out_png)


def plot_profiles(profile_csvs, labels, out_png) -> Path:
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots()
        for path, label in zip(profile_csvs, labels):
            p = read_csv(path)
            ax.plot(p["x"], p["phi"], label=label)
        ax.set_xlabel("x")
        ax.set_ylabel(r"$\phi$")
        ax.legend(loc="best")
        fig.savefig(out_png)
        plt.close(fig)
    return Path(out_png)


# written by ``--emit-plotscript``; plots every CSV in its own directory
PLOTSCRIPT = '''"""Plot every CSV in this directory (first column on the x axis)."""
import csv
import glob
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "*.csv"))):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    try:
        cols = [[float(r[j]) for r in body] for j in range(len(header))]
    except ValueError:
        continue
    fig, ax = plt.subplots()
    for j in range(1, len(header)):
        ax.plot(cols[0], cols[j], label=header[j])
    ax.set_xlabel(header[0])
    ax.legend(loc="best")
    fig.savefig(path[:-4] + ".png", bbox_inches="tight")
    plt.close(fig)
'''
