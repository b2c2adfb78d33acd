"""Render figures from the CSV schemas documented in the main README.

Every function validates the input schema before touching matplotlib and
raises SchemaError naming the first missing column.  Rendering is pinned
(Agg backend, fixed rcParams, fixed Software metadata) so outputs are
byte-for-byte reproducible for a given matplotlib build.
"""

import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# pinned style: golden-image tests depend on every entry here
STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.5,
    "legend.framealpha": 1.0,
    "svg.hashsalt": "mmdplots",
}

# overrides the default Software string, which embeds the library version
PNG_METADATA = {"Software": "mmdplots"}


class SchemaError(Exception):
    """An input CSV is missing a required column or has no data rows."""


def read_table(path, required):
    """Read a CSV into a dict of float columns, validating the header."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(f"{path}: missing required column '{col}'")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    table = {}
    for col in required:
        if col in ("method", "variant"):
            table[col] = [r[col] for r in rows]
        else:
            try:
                table[col] = np.array([float(r[col]) for r in rows])
            except ValueError as exc:
                raise SchemaError(f"{path}: non-numeric value in column '{col}': {exc}") from exc
    return table


def _save(fig, out_path):
    fig.savefig(out_path, format="png", metadata=PNG_METADATA)
    plt.close(fig)


def plot_power_curve(csv_path, out_path):
    """One rejection-rate line per method with stderr error bars."""
    t = read_table(csv_path, ["epsilon", "method", "rejection_rate", "stderr"])
    groups = defaultdict(list)
    for i, method in enumerate(t["method"]):
        groups[method].append(i)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for method in sorted(groups):
            idx = np.array(groups[method])
            order = np.argsort(t["epsilon"][idx])
            idx = idx[order]
            ax.errorbar(t["epsilon"][idx], t["rejection_rate"][idx],
                        yerr=t["stderr"][idx], marker="o", capsize=3, label=method)
        ax.set_xlabel("epsilon")
        ax.set_ylabel("rejection rate")
        ax.set_ylim(-0.02, 1.02)
        ax.legend()
        _save(fig, out_path)
    return fig


def plot_timing(csv_path, out_path):
    """Left: log-log wall time vs m per variant.  Right: thread speedup."""
    t = read_table(csv_path, ["m", "B", "threads", "variant", "rep", "wall_seconds"])
    # best (minimum) time per cell; warm-up exclusion is the producer's job
    cells = defaultdict(lambda: np.inf)
    for i, variant in enumerate(t["variant"]):
        key = (variant, int(t["m"][i]), int(t["threads"][i]))
        cells[key] = min(cells[key], t["wall_seconds"][i])
    variants = sorted({k[0] for k in cells})
    base_threads = min(k[2] for k in cells)
    with plt.rc_context(STYLE):
        fig, (ax_m, ax_th) = plt.subplots(1, 2, figsize=(9.0, 4.0))
        for variant in variants:
            ms = sorted({k[1] for k in cells if k[0] == variant and k[2] == base_threads})
            ys = [cells[(variant, m, base_threads)] for m in ms]
            ax_m.plot(ms, ys, marker="o", label=variant)
        ax_m.set_xscale("log")
        ax_m.set_yscale("log")
        ax_m.set_xlabel("m")
        ax_m.set_ylabel("seconds")
        ax_m.set_title(f"scaling ({base_threads} thread)")
        ax_m.legend()
        max_m = max(k[1] for k in cells)
        for variant in variants:
            ths = sorted({k[2] for k in cells if k[0] == variant and k[1] == max_m})
            if len(ths) < 2 or (variant, max_m, ths[0]) not in cells:
                continue
            base = cells[(variant, max_m, ths[0])]
            ax_th.plot(ths, [base / cells[(variant, max_m, th)] for th in ths],
                       marker="o", label=variant)
        ax_th.set_xlabel("threads")
        ax_th.set_ylabel("speedup")
        ax_th.set_title(f"threading (m = {max_m})")
        if ax_th.lines:
            ax_th.legend()
        fig.tight_layout()
        _save(fig, out_path)
    return fig


def plot_bandwidth_hist(csv_paths, out_path):
    """Histogram of the chosen bandwidths pooled over selection-grid CSVs."""
    chosen = []
    grid = None
    for path in csv_paths:
        t = read_table(path, ["bandwidth", "chosen"])
        mask = t["chosen"] != 0
        if not mask.any():
            raise SchemaError(f"{path}: no row has chosen=1")
        chosen.extend(t["bandwidth"][mask])
        if grid is None:
            grid = t["bandwidth"]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        edges = np.geomspace(min(grid.min(), min(chosen)) * 0.9,
                             max(grid.max(), max(chosen)) * 1.1, 25)
        ax.hist(chosen, bins=edges, edgecolor="black")
        ax.set_xscale("log")
        ax.set_xlabel("bandwidth")
        ax.set_ylabel("count")
        _save(fig, out_path)
    return fig


def plot_witness(csv_path, out_path):
    """Strip plot of witness values with a zero reference line."""
    t = read_table(csv_path, ["index", "value"])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.axhline(0.0, color="black", linewidth=0.8)
        colors = np.where(t["value"] >= 0, "C0", "C3")
        ax.scatter(t["index"], t["value"], c=colors, s=18)
        ax.set_xlabel("probe index")
        ax.set_ylabel("witness value")
        _save(fig, out_path)
    return fig
