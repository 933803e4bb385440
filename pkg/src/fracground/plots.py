"""Static figures for a finished run: energy trend, density heatmaps,
radial profiles.

Figures render through the Agg backend straight to SVG next to the CSV
reports.  The SVG date metadata is stripped so reruns of the same
manifest produce identical bytes.
"""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "fracground"  # reproducible element ids

import matplotlib.pyplot as plt
import numpy as np

from .concentration import harmonic_mean_radius
from .domain import Annulus
from .fieldio import load_field

_SAVE_KW = {"format": "svg", "metadata": {"Date": None}}


def _placeholder(ax, text):
    ax.text(0.5, 0.5, text, ha="center", va="center", transform=ax.transAxes)
    ax.set_axis_off()


def emit_plots(out_dir, manifest: dict = None) -> list:
    """Render the figures for a persisted run; returns the SVG paths.

    Missing pieces degrade to annotated placeholders instead of failing:
    a partial run still gets a readable report.
    """
    if manifest is None:
        with open(os.path.join(out_dir, "manifest.json"), "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    plot_dir = os.path.join(out_dir, "plots")
    os.makedirs(plot_dir, exist_ok=True)
    written = []

    sweep = None
    sweep_path = os.path.join(out_dir, manifest.get("outputs", {}).get("sweep_json", "sweep.json"))
    if os.path.exists(sweep_path):
        with open(sweep_path, "r", encoding="utf-8") as fh:
            sweep = json.load(fh)

    written.append(_energy_trend(plot_dir, sweep))

    fields = manifest.get("field_paths", {})
    domain = None
    for key in sorted(fields, key=float):
        path = os.path.join(out_dir, fields[key])
        if not os.path.exists(path):
            continue
        fld, meta = load_field(path)
        domain = fld.grid.spec
        written.append(_density_map(plot_dir, key, fld, meta))

    if isinstance(domain, Annulus):
        written.append(_radial_profile(plot_dir, out_dir, fields, domain))
    return [p for p in written if p]


def _energy_trend(plot_dir, sweep) -> str:
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    if sweep and sweep.get("entries"):
        eps = [e["eps"] for e in sweep["entries"]]
        I = [e["report"]["J_q"] for e in sweep["entries"]]
        lo = [e["lower_bound"] for e in sweep["entries"]]
        target = sweep["entries"][0]["target"]
        ax.plot(eps, I, "o-", label=r"$I_\varepsilon$")
        ax.plot(eps, lo, "s--", label="lower bound")
        ax.axhline(target, color="k", lw=0.8, label=r"$(s/N)\,\hat S^{N/ps}$")
        ax.set_xlabel(r"$\varepsilon$")
        ax.set_ylabel("energy")
        ax.invert_xaxis()
        ax.legend(fontsize=8)
    else:
        _placeholder(ax, "no sweep data")
    path = os.path.join(plot_dir, "energy_trend.svg")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def _density_map(plot_dir, eps_key, fld, meta) -> str:
    grid = fld.grid
    pstar_density = np.abs(fld.values) ** _pstar(meta, grid.dim)
    fig, ax = plt.subplots(figsize=(4.4, 3.6))
    if grid.dim == 1:
        ax.plot(grid.nodes[:, 0], pstar_density, lw=1.0)
        ax.set_xlabel("x")
        ax.set_ylabel(r"$|u|^{p^*}$")
    else:
        img = pstar_density.reshape(grid.shape)
        extent = [grid.bbox_lo[1], grid.bbox_hi[1], grid.bbox_lo[0], grid.bbox_hi[0]]
        ax.imshow(img, origin="lower", extent=extent, aspect="equal")
        ax.set_xlabel("y")
        ax.set_ylabel("x")
    ax.set_title(f"eps = {eps_key}", fontsize=9)
    path = os.path.join(plot_dir, f"nu_density_eps_{eps_key}.svg")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def _radial_profile(plot_dir, out_dir, fields, domain: Annulus) -> str:
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    drawn = False
    for key in sorted(fields, key=float):
        path = os.path.join(out_dir, fields[key])
        if not os.path.exists(path):
            continue
        fld, _ = load_field(path)
        r = np.linalg.norm(fld.grid.interior_nodes, axis=1)
        order = np.argsort(r)
        ax.plot(r[order], fld.interior_values[order], ".", ms=1.5, label=f"eps={key}")
        drawn = True
    if drawn:
        hm = harmonic_mean_radius(domain.r1, domain.r2)
        ax.axvline(hm, color="k", lw=0.8, ls=":", label=f"harmonic mean {hm:g}")
        ax.set_xlabel("|x|")
        ax.set_ylabel("u")
        ax.legend(fontsize=7, markerscale=4)
    else:
        _placeholder(ax, "no fields persisted")
    path = os.path.join(plot_dir, "radial_profile.svg")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def _pstar(meta, dim) -> float:
    from .kernel import critical_exponent

    p = float(meta.get("p", 2.0))
    s = float(meta.get("s", 0.5))
    return critical_exponent(dim, p, s)
