"""Canned figure definitions: cooling curves, nonclassicality, entanglement.

Each figure is a family of sweep curves with caption-level defaults
(theta = 1e5, eta = 0.8).  Emission produces three files per figure: the
data CSV, a standalone matplotlib script referencing the CSV by relative
path, and a rendered PNG.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from .params import SystemParams, to_relative_frame
from .steady import (cold_damping_energy_units, entanglement_marker,
                     momentum_feedback_energy_units, momentum_feedback_state)
from .sweep import _format

FIGURES = ("fig3", "fig4", "fig5", "fig6_qp", "fig6_squeeze", "fig7")

_THETA = 1e5
_ETA = 0.8


@dataclass(frozen=True)
class FigureData:
    name: str
    xlabel: str
    ylabel: str
    xscale: str
    yscale: str
    curve_labels: tuple
    x: list                      # shared abscissa
    curves: dict                 # label -> list of y
    reference_line: float = None # horizontal guide (e.g. the 1/4 limit)


def _logspace(lo, hi, n=400):
    return [10.0 ** (math.log10(lo) + (math.log10(hi) - math.log10(lo))
                     * i / (n - 1)) for i in range(n)]


def _energy_family(gains_or_qs, energy, xlo, xhi, labels):
    x = _logspace(xlo, xhi)
    return x, {lab: [energy(p, z) for z in x]
               for lab, p in zip(labels, gains_or_qs)}


def make_figure(name, *, theta=_THETA, eta=_ETA, points=400):
    if name == "fig3":
        gains = (10.0, 1e3, 1e5, 1e7)
        x, curves = _energy_family(
            gains, lambda g, z: cold_damping_energy_units(g, z, eta, theta),
            1.0, 1e9, tuple(f"g2={g:g}" for g in gains))
        return FigureData(name, "zeta", "energy (2 U / hbar omega_m)",
                          "log", "log", tuple(curves), x, curves)
    if name == "fig4":
        gains = (10.0, 1e3, 1e5, 1e7)
        quality = 1e7
        x, curves = _energy_family(
            gains,
            lambda g, z: momentum_feedback_energy_units(g, z, eta, theta,
                                                        quality),
            1.0, 1e9, tuple(f"g1={g:g}" for g in gains))
        return FigureData(name, "zeta", "energy (2 U / hbar omega_m)",
                          "log", "log", tuple(curves), x, curves)
    if name == "fig5":
        qs = (1e3, 1e5, 1e7)
        g1 = 1e7
        x, curves = _energy_family(
            qs,
            lambda q, z: momentum_feedback_energy_units(g1, z, eta, theta, q),
            1.0, 1e9, tuple(f"Q={q:g}" for q in qs))
        return FigureData(name, "zeta", "energy (2 U / hbar omega_m)",
                          "log", "log", tuple(curves), x, curves)
    if name == "fig6_qp":
        gains = (1e5, 1e6, 1e7)
        quality = 1e4
        x = _logspace(1.0, 1e7, points)
        curves = {}
        for g in gains:
            ys = []
            for z in x:
                sys = SystemParams.from_ratios(theta, eta, quality, z)
                st = momentum_feedback_state(sys, g)
                ys.append(-2.0 * st.qp_sym)   # -<QP+PQ>, positive = contractive
            curves[f"g1={g:g}"] = ys
        return FigureData(name, "zeta", "-<QP+PQ>_st", "log", "linear",
                          tuple(curves), x, curves, reference_line=0.0)
    if name == "fig6_squeeze":
        gains = (1e7, 1e9)
        quality = 1e4
        x = _logspace(1e4, 1e9, points)
        curves = {}
        for g in gains:
            ys = []
            for z in x:
                sys = SystemParams.from_ratios(theta, eta, quality, z)
                ys.append(momentum_feedback_state(sys, g).q2)
            curves[f"g1={g:g}"] = ys
        return FigureData(name, "zeta", "<Q^2>_st", "log", "log",
                          tuple(curves), x, curves, reference_line=0.25)
    if name == "fig7":
        qs = (1e3, 3e3, 1e4)
        x = _logspace(1e12, 1e22, points)
        curves = {}
        for q in qs:
            sys = SystemParams.from_ratios(theta, eta, q, 0.0)
            rel = to_relative_frame(sys).effective
            ys = [entanglement_marker(rel, g).entanglement_marker for g in x]
            curves[f"Q={q:g}"] = ys
        return FigureData(name, "g3", "entanglement marker E", "log", "log",
                          tuple(curves), x, curves, reference_line=1.0)
    raise ValueError(f"unknown figure name '{name}'; choose from {FIGURES}")


def write_figure_csv(fig: FigureData, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x"] + list(fig.curve_labels))
        for i, xv in enumerate(fig.x):
            writer.writerow([_format(xv)] + [_format(fig.curves[lab][i])
                                             for lab in fig.curve_labels])


_PLOT_TEMPLATE = '''\
#!/usr/bin/env python3
"""Plot {name} from {csv_name} (regenerate the CSV with the package CLI)."""
import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
with open(here / "{csv_name}", newline="") as fh:
    reader = csv.reader(fh)
    header = next(reader)
    cols = list(zip(*[[float(v) for v in row] for row in reader]))

fig, ax = plt.subplots(figsize=(6.0, 4.2))
for label, ys in zip(header[1:], cols[1:]):
    ax.plot(cols[0], ys, label=label)
{refline}ax.set_xscale("{xscale}")
ax.set_yscale("{yscale}")
ax.set_xlabel("{xlabel}")
ax.set_ylabel("{ylabel}")
ax.legend()
fig.tight_layout()
fig.savefig(here / "{png_name}", dpi=150)
'''


def write_plot_script(fig: FigureData, path, csv_name, png_name):
    refline = ""
    if fig.reference_line is not None:
        refline = (f'ax.axhline({fig.reference_line!r}, color="gray", '
                   'ls="--", lw=0.8)\n')
    Path(path).write_text(_PLOT_TEMPLATE.format(
        name=fig.name, csv_name=csv_name, png_name=png_name,
        refline=refline, xscale=fig.xscale, yscale=fig.yscale,
        xlabel=fig.xlabel, ylabel=fig.ylabel))


def render_png(fig: FigureData, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    f, ax = plt.subplots(figsize=(6.0, 4.2))
    for lab in fig.curve_labels:
        ax.plot(fig.x, fig.curves[lab], label=lab)
    if fig.reference_line is not None:
        ax.axhline(fig.reference_line, color="gray", ls="--", lw=0.8)
    ax.set_xscale(fig.xscale)
    ax.set_yscale(fig.yscale)
    ax.set_xlabel(fig.xlabel)
    ax.set_ylabel(fig.ylabel)
    ax.legend()
    f.tight_layout()
    f.savefig(path, dpi=150)
    plt.close(f)


def emit_figure(name, out_dir, **kwargs):
    """CSV + standalone plot script + rendered PNG; returns the three paths."""
    fig = make_figure(name, **kwargs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}.csv"
    script_path = out / f"plot_{name}.py"
    png_path = out / f"{name}.png"
    write_figure_csv(fig, csv_path)
    write_plot_script(fig, script_path, csv_path.name, png_path.name)
    render_png(fig, png_path)
    return csv_path, script_path, png_path
