"""Render the four figure analogs from dharper repro CSV outputs.

Style choices per figure
------------------------
fig1  two-panel phase-space scatter (x mod 2pi vs p mod 2pi), 0.4-pt black
      points, square panels, rational beta left / irrational right.
fig2  log-log A(omega): stars for rational beta, open circles for
      irrational; inset with the island fraction S(omega) (stars) and the
      rate-law curve c*omega*S (open circles, c fitted by least squares,
      never hard-coded).
fig3  two-panel grey-tone density image, space l horizontal, time t
      vertical growing upward, black = maximum density (colormap Greys),
      irrational beta left / rational right.
fig4  mean participation ratio vs omega on a log y-axis, plus an inset
      with one typical eigenstate density on a log scale.

Output is PNG at 200 dpi by default.  Every reader validates the CSV
header row against the schema recorded in the sidecar meta JSON and fails
loudly, naming the offending file or column.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGURES = ("fig1", "fig2", "fig3", "fig4")

# documented input schemas per figure: file stem -> (schema id, columns)
SCHEMAS = {
    "fig1-rational": ("strobe-points/1", ["t", "x_mod", "p_mod"]),
    "fig1-irrational": ("strobe-points/1", ["t", "x_mod", "p_mod"]),
    "fig2-rational": ("spread-scan/1", ["omega", "A", "S", "residual"]),
    "fig2-irrational": ("spread-scan/1", ["omega", "A", "S", "residual"]),
    "fig3-irrational-density": ("density-history/1", ["t", "l", "density"]),
    "fig3-rational-density": ("density-history/1", ["t", "l", "density"]),
    "fig4-scan": ("localization-scan/1",
                  ["omega_or_alpha", "mean_P", "S", "n_states"]),
    "fig4-scan-state": ("eigenstate/1", ["l", "re", "im", "density"]),
}


class SchemaError(Exception):
    pass


def read_table(input_dir: str, stem: str) -> dict:
    """Read a documented CSV into column arrays, validating its schema."""
    path = os.path.join(input_dir, stem + ".csv")
    if not os.path.exists(path):
        raise SchemaError(f"missing input CSV: {path}")
    schema_id, columns = SCHEMAS[stem]
    meta_file = os.path.join(input_dir, stem + ".meta.json")
    if os.path.exists(meta_file):
        with open(meta_file) as fh:
            meta = json.load(fh)
        if meta.get("schema") != schema_id:
            raise SchemaError(
                f"{path}: meta schema {meta.get('schema')!r} does not match "
                f"documented {schema_id!r}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        for col in columns:
            if col not in header:
                raise SchemaError(f"{path}: missing column '{col}' "
                                  f"(header: {header})")
        idx = [header.index(c) for c in columns]
        rows = [[row[i] for i in idx] for row in reader]
    data = {}
    arr = np.array(rows, dtype=object)
    for j, col in enumerate(columns):
        column = arr[:, j] if len(rows) else np.array([])
        try:
            data[col] = column.astype(float)
        except ValueError:
            data[col] = column
    return data


def plot_fig1(input_dir: str, output_path: str, dpi: int) -> None:
    rat = read_table(input_dir, "fig1-rational")
    irr = read_table(input_dir, "fig1-irrational")
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.5), sharey=True)
    for ax, data, title in ((axes[0], rat, "rational beta"),
                            (axes[1], irr, "irrational beta")):
        ax.plot(data["x_mod"], data["p_mod"], ".", color="black", ms=0.4)
        ax.set_xlim(-np.pi, np.pi)
        ax.set_ylim(-np.pi, np.pi)
        ax.set_xlabel("x")
        ax.set_title(title, fontsize=10)
        ax.set_aspect("equal")
    axes[0].set_ylabel("p")
    fig.tight_layout()
    fig.savefig(output_path, dpi=dpi)
    plt.close(fig)


def plot_fig2(input_dir: str, output_path: str, dpi: int) -> None:
    rat = read_table(input_dir, "fig2-rational")
    irr = read_table(input_dir, "fig2-irrational")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(rat["omega"], rat["A"], "*-", color="tab:blue",
              label="rational beta")
    ax.loglog(irr["omega"], irr["A"], "o-", mfc="none", color="tab:red",
              label="irrational beta")
    ax.set_xlabel("omega")
    ax.set_ylabel("A")
    ax.legend(fontsize=8, loc="lower left")
    sel = np.isfinite(irr["S"]) & (irr["S"] > 0)
    if sel.sum() >= 2:
        inset = fig.add_axes([0.62, 0.62, 0.27, 0.25])
        om = irr["omega"][sel]
        s_vals = irr["S"][sel]
        a_vals = irr["A"][sel]
        inset.plot(om, s_vals, "*", color="tab:red", label="S")
        # rate law A ~ c*omega*S: overlay A/(c*omega) with c fitted, not assumed
        c = float(np.sum(a_vals * om * s_vals) / np.sum((om * s_vals) ** 2))
        inset.plot(om, a_vals / (c * om), "o", mfc="none",
                   color="tab:blue", ms=4)
        inset.set_xlabel("omega", fontsize=7)
        inset.set_ylabel("S", fontsize=7)
        inset.tick_params(labelsize=6)
    fig.savefig(output_path, dpi=dpi)
    plt.close(fig)


def _density_grid(data: dict):
    """Sparse (t, l, density) rows back into a dense image array."""
    t_vals = np.unique(data["t"])
    l_min = int(data["l"].min())
    l_max = int(data["l"].max())
    img = np.zeros((len(t_vals), l_max - l_min + 1))
    t_index = {t: i for i, t in enumerate(t_vals)}
    for t, l, rho in zip(data["t"], data["l"], data["density"]):
        img[t_index[t], int(l) - l_min] = rho
    return t_vals, (l_min, l_max), img


def plot_fig3(input_dir: str, output_path: str, dpi: int):
    irr = read_table(input_dir, "fig3-irrational-density")
    rat = read_table(input_dir, "fig3-rational-density")
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.5), sharey=True)
    images = []
    for ax, data, title in ((axes[0], irr, "irrational beta"),
                            (axes[1], rat, "rational beta")):
        t_vals, (l_min, l_max), img = _density_grid(data)
        # black = maximum density per the grey-tone convention
        im = ax.imshow(img, origin="lower", aspect="auto", cmap="Greys",
                       vmin=0.0, vmax=img.max(),
                       extent=(l_min, l_max, t_vals[0], t_vals[-1]))
        images.append(im)
        ax.set_xlabel("l")
        ax.set_title(title, fontsize=10)
    axes[0].set_ylabel("t")
    fig.tight_layout()
    fig.savefig(output_path, dpi=dpi)
    result = images
    plt.close(fig)
    return result


def plot_fig4(input_dir: str, output_path: str, dpi: int) -> None:
    scan = read_table(input_dir, "fig4-scan")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    order = np.argsort(scan["omega_or_alpha"])
    ax.semilogy(scan["omega_or_alpha"][order], scan["mean_P"][order],
                "s-", color="black", mfc="none")
    ax.set_xlabel("omega")
    ax.set_ylabel("mean participation ratio")
    try:
        state = read_table(input_dir, "fig4-scan-state")
        inset = fig.add_axes([0.55, 0.55, 0.32, 0.3])
        dens = np.maximum(state["density"], 1e-18)
        inset.semilogy(state["l"], dens, "-", lw=0.7, color="black")
        inset.set_xlabel("l", fontsize=7)
        inset.set_ylabel("|b|^2", fontsize=7)
        inset.tick_params(labelsize=6)
    except SchemaError:
        pass   # the inset is optional; the scan panel alone is still valid
    fig.savefig(output_path, dpi=dpi)
    plt.close(fig)


def plot(figure_id: str, input_dir: str, output_path: str, dpi: int = 200):
    if figure_id not in FIGURES:
        raise SchemaError(f"unknown figure id {figure_id!r}")
    fn = {"fig1": plot_fig1, "fig2": plot_fig2,
          "fig3": plot_fig3, "fig4": plot_fig4}[figure_id]
    return fn(input_dir, output_path, dpi)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot_fig", description="render dharper repro CSVs as images")
    parser.add_argument("figure", choices=FIGURES)
    parser.add_argument("--in", dest="input_dir", required=True)
    parser.add_argument("--out", dest="output_path", required=True)
    parser.add_argument("--dpi", type=int, default=200)
    args = parser.parse_args(argv)
    try:
        plot(args.figure, args.input_dir, args.output_path, args.dpi)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(args.output_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
