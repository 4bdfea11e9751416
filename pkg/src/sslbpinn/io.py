"""CSV trace export/import and SVG plots."""

import csv
import os

import numpy as np

CSV_COLUMNS = ("t", "q1", "q2", "qd1", "qd2", "e1", "e2", "r1", "r2", "tau1", "tau2",
               "E_hat", "E_tilde", "err_M", "err_C", "err_F", "f_tilde_norm")
FLOAT_FMT = "%.17g"


def trace_matrix(trace):
    """Stack a trace into the ``CSV_COLUMNS`` layout, one row per sample."""
    n = len(trace)
    if n == 0:
        return np.zeros((0, len(CSV_COLUMNS)))
    cols = [trace.t[:, None], trace.q, trace.q_d, trace.e, trace.r, trace.tau,
            trace.E_hat[:, None], trace.E_tilde[:, None], trace.err_M[:, None],
            trace.err_C[:, None], trace.err_F[:, None], trace.f_tilde_norm[:, None]]
    return np.hstack([np.asarray(c, dtype=float).reshape(n, -1) for c in cols])


def export_csv(trace, path):
    """Write the trace with 17 significant digits; byte-identical for identical traces."""
    data = trace_matrix(trace)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in data:
            fh.write(",".join(FLOAT_FMT % v for v in row) + "\n")
    return path


def read_csv(path):
    """Read a trace CSV back as a dict of column name -> 1-D array."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: not a trace CSV (unexpected header)")
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(len(rows), len(CSV_COLUMNS))
    return {name: data[:, i] for i, name in enumerate(CSV_COLUMNS)}


def export_weights(trace, path):
    """Initial and final weight vectors, one row per (network, stage)."""
    with open(path, "w", newline="") as fh:
        for stage, weights in (("initial", trace.initial_weights), ("final", trace.final_weights)):
            for name, theta in weights.items():
                fh.write(",".join([name, stage] + [FLOAT_FMT % v for v in np.ravel(theta)]) + "\n")
    return path


def _as_columns(source):
    if isinstance(source, dict):
        return source
    data = trace_matrix(source)
    return {name: data[:, i] for i, name in enumerate(CSV_COLUMNS)}


def build_figures(series):
    """Matplotlib figures for the error plots; returns ``[(suffix, figure), ...]``.

    ``series`` maps a label (e.g. ``"developed"``) to a trace or to the column
    dict returned by :func:`read_csv`; every label is overlaid on the same axes.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cols = {label: _as_columns(src) for label, src in series.items()}

    fig_err, axes = plt.subplots(3, 1, sharex=True, figsize=(7, 7))
    for ax, key, label in zip(axes, ("err_M", "err_C", "err_F"),
                              ("||M - PhiM||", "||C - PhiC||", "||F - PhiF||")):
        for name, c in cols.items():
            ax.plot(c["t"], c[key], label=name, linewidth=0.8)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    axes[0].legend(loc="upper right")
    axes[-1].set_xlabel("t [s]")
    fig_err.tight_layout()

    fig_f, ax = plt.subplots(figsize=(7, 3.5))
    for name, c in cols.items():
        ax.plot(c["t"], c["f_tilde_norm"], label=name, linewidth=0.8)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("||f~|| [N.m]")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right")
    fig_f.tight_layout()
    return [("errors", fig_err), ("f_tilde", fig_f)]


def export_svg_plots(series, path_prefix):
    """Write :func:`build_figures` output as ``<prefix>_errors.svg`` and ``<prefix>_f_tilde.svg``."""
    import matplotlib.pyplot as plt

    out_dir = os.path.dirname(path_prefix)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    paths = []
    for suffix, fig in build_figures(series):
        paths.append(f"{path_prefix}_{suffix}.svg")
        # no timestamp and fixed element ids so identical data gives identical files
        with plt.rc_context({"svg.hashsalt": "sslbpinn"}):
            fig.savefig(paths[-1], format="svg", metadata={"Date": None})
        plt.close(fig)
    return paths
