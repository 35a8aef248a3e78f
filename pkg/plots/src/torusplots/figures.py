"""Figure builders over the documented toruskit CSV schemas.

Four figure kinds, each tied to one stable column set:

  spectrum     multipliers.csv   (index, re, im, abs_minus_one)
  family       family.csv        (beta_1.., eps, y_norm, residual,
                                  freq_1.., converged, unit_multiplicity)
  frequencies  family.csv        (same columns, freq_* on the y axis)
  twist        twist.csv         (beta_1.., eps, twist_det, degenerate)

The module reads only these columns and never mutates its inputs; output
images are written atomically (temp file + rename).
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["FigureRequest", "SchemaError", "EmptyInputError", "build_figure", "render", "KINDS"]

KINDS = ("spectrum", "family", "frequencies", "twist")


class SchemaError(ValueError):
    """A required CSV column is missing; the message names it."""


class EmptyInputError(ValueError):
    """The CSV carries a header but no data rows."""


@dataclass
class FigureRequest:
    kind: str
    inputs: list
    output: str
    title: str | None = None
    unit_circle: bool = True
    tol_unit: float = 1e-6
    resonance_gridlines: bool = False
    dpi: int = 150
    style: dict = field(default_factory=dict)


def _read_csv(path) -> dict:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path}: no header row") from None
        rows = [row for row in reader if row]
    if not rows:
        raise EmptyInputError(f"{path}: no data rows")
    cols = {}
    for j, name in enumerate(header):
        cols[name] = np.array([float(row[j]) for row in rows])
    return cols


def _need(cols, names, path):
    for name in names:
        if name not in cols:
            raise SchemaError(f"{path}: missing column {name!r}")


def _beta_columns(cols):
    names = []
    k = 1
    while f"beta_{k}" in cols:
        names.append(f"beta_{k}")
        k += 1
    return names


def _freq_columns(cols):
    names = []
    k = 1
    while f"freq_{k}" in cols:
        names.append(f"freq_{k}")
        k += 1
    return names


def _spectrum_figure(req, cols, meta):
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    re, im = cols["re"], cols["im"]
    near_one = cols["abs_minus_one"] < req.tol_unit
    ax.scatter(re, im, s=48, facecolors="none", edgecolors="tab:blue",
               label="multipliers", zorder=3)
    if near_one.any():
        ax.scatter(re[near_one], im[near_one], s=16, color="tab:red",
                   label=f"|$\\lambda$-1| < {req.tol_unit:g}", zorder=4)
    if req.unit_circle:
        angle = np.linspace(0.0, 2 * np.pi, 256)
        ax.plot(np.cos(angle), np.sin(angle), color="0.6", lw=0.8, zorder=1)
    ax.axhline(0.0, color="0.85", lw=0.6)
    ax.axvline(0.0, color="0.85", lw=0.6)
    ax.set_xlabel("Re $\\lambda$")
    ax.set_ylabel("Im $\\lambda$")
    ax.set_aspect("equal")
    ax.legend(loc="best", fontsize=8)
    meta["n_markers"] = int(re.size)
    meta["n_near_unit"] = int(near_one.sum())
    return fig


def _family_figure(req, cols, meta):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    beta1 = cols["beta_1"]
    eps_values = np.unique(cols["eps"])
    converged = cols["converged"] > 0.5
    for e in eps_values:
        here = cols["eps"] == e
        good = here & converged
        order = np.argsort(beta1[good])
        ax.plot(beta1[good][order], cols["y_norm"][good][order], "o-",
                ms=3, lw=1, label=f"eps={e:g}")
        bad = here & ~converged
        if bad.any():
            ax.plot(beta1[bad], np.zeros(bad.sum()), "x", color="tab:red", ms=6)
            for b in beta1[bad]:
                ax.axvspan(b - 1e-3, b + 1e-3, color="tab:red", alpha=0.15, lw=0)
    ax.set_xlabel("beta_1")
    ax.set_ylabel("max |y*|")
    ax.legend(loc="best", fontsize=8)
    meta["n_points"] = int(beta1.size)
    meta["n_eps"] = int(eps_values.size)
    meta["n_unconverged"] = int((~converged).sum())
    return fig


def _frequencies_figure(req, cols, meta):
    _need(cols, ["freq_1"], req.inputs[0])
    freq_names = _freq_columns(cols)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    beta1 = cols["beta_1"]
    converged = cols["converged"] > 0.5
    eps_values = np.unique(cols["eps"])
    for e in eps_values:
        here = (cols["eps"] == e) & converged
        order = np.argsort(beta1[here])
        for name in freq_names:
            ax.plot(beta1[here][order], cols[name][here][order], "o-", ms=3,
                    lw=1, label=f"{name}, eps={e:g}")
    if req.resonance_gridlines:
        lo = min(np.nanmin(cols[name][converged]) for name in freq_names)
        hi = max(np.nanmax(cols[name][converged]) for name in freq_names)
        for level in np.arange(np.floor(2 * lo), np.ceil(2 * hi) + 1) / 2.0:
            ax.axhline(level, color="0.85", lw=0.5, zorder=0)
    ax.set_xlabel("beta_1")
    ax.set_ylabel("frequency")
    ax.legend(loc="best", fontsize=7)
    meta["n_points"] = int(beta1.size)
    meta["n_components"] = len(freq_names)
    return fig


def _twist_figure(req, cols, meta):
    beta_names = _beta_columns(cols)
    beta1 = cols["beta_1"]
    dets = cols["twist_det"]
    degenerate = cols["degenerate"] > 0.5
    if len(beta_names) >= 2:
        x_name, y_name = "beta_1", "beta_2"
        x, y = beta1, cols["beta_2"]
        panels = np.unique(cols["eps"])
        panel_of = cols["eps"]
        panel_label = "eps"
    else:
        x_name, y_name = "beta_1", "eps"
        x, y = beta1, cols["eps"]
        panels = np.array([None])
        panel_of = None
        panel_label = None
    fig, axes = plt.subplots(1, len(panels), figsize=(4.5 * len(panels), 4.0),
                             squeeze=False)
    scale = float(np.nanmax(np.abs(dets))) or 1.0
    cells = 0
    for axis, panel in zip(axes[0], panels):
        mask = np.ones(dets.size, dtype=bool) if panel is None else panel_of == panel
        sc = axis.scatter(x[mask], y[mask], c=dets[mask], cmap="RdBu_r",
                          vmin=-scale, vmax=scale, s=260, marker="s")
        dead = mask & degenerate
        if dead.any():
            axis.scatter(x[dead], y[dead], marker="x", color="k", s=60)
        axis.set_xlabel(x_name)
        axis.set_ylabel(y_name)
        if panel is not None:
            axis.set_title(f"{panel_label} = {panel:g}", fontsize=9)
        cells += int(mask.sum())
    fig.colorbar(sc, ax=axes[0, -1], label="twist det")
    meta["n_cells"] = cells
    meta["n_degenerate"] = int(degenerate.sum())
    return fig


_REQUIRED = {
    "spectrum": ("index", "re", "im", "abs_minus_one"),
    "family": ("beta_1", "eps", "y_norm", "residual", "converged",
               "unit_multiplicity"),
    "frequencies": ("beta_1", "eps", "converged"),
    "twist": ("beta_1", "eps", "twist_det", "degenerate"),
}

_BUILDERS = {
    "spectrum": _spectrum_figure,
    "family": _family_figure,
    "frequencies": _frequencies_figure,
    "twist": _twist_figure,
}


def build_figure(req: FigureRequest):
    """Validate the request and build the matplotlib figure.

    Returns (figure, meta) where meta summarizes the plotted data, so
    identical inputs can be checked to yield identical plotted content.
    """
    if req.kind not in KINDS:
        raise ValueError(f"unknown figure kind {req.kind!r}; expected one of {KINDS}")
    if not req.inputs:
        raise ValueError("no input CSV given")
    path = req.inputs[0]
    cols = _read_csv(path)
    _need(cols, _REQUIRED[req.kind], path)
    meta = {"kind": req.kind, "input": str(path)}
    fig = _BUILDERS[req.kind](req, cols, meta)
    if req.title:
        fig.suptitle(req.title)
    return fig, meta


def render(req: FigureRequest) -> str:
    """Build the figure and write the image atomically; returns the path."""
    fig, meta = build_figure(req)
    out = Path(req.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.with_name(out.name + ".part")
    try:
        fig.savefig(tmp, dpi=req.dpi, format=out.suffix.lstrip(".") or "png")
        os.replace(tmp, out)
    finally:
        plt.close(fig)
        if tmp.exists():
            tmp.unlink()
    return str(out)
