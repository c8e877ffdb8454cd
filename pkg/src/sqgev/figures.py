"""Figure rendering for the report path.

Every renderer takes file paths or plain tables and writes a PNG next to the
delimited output; nothing here feeds back into the numerics.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update({
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "lines.linewidth": 1.3,
})


def _finish(fig, out_path):
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def plot_series(series_csv, out_path, title=None):
    """Norm decay (log scale) and budget residual for one run."""
    from .orchestrate import read_series

    cols = read_series(series_csv)
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 5.6),
                                   height_ratios=[2, 1])
    t = cols["t"]
    for name, label in (("l2", "L2"), ("hs", "H^s"),
                        ("hs_gevrey", "Gevrey H^s")):
        ax1.semilogy(t, np.maximum(cols[name], 1e-300), label=label)
    ax1.set_ylabel("norm")
    ax1.legend(loc="best")
    if title:
        ax1.set_title(title)
    ax2.plot(t, cols["budget_residual"])
    ax2.set_xlabel("t")
    ax2.set_ylabel("L2 budget residual")
    return _finish(fig, out_path)


def plot_comparison(labeled_series, out_path, column="hs_gevrey", title=None):
    """Overlay one column from several runs; labeled_series is a list of
    (label, columns-dict) pairs."""
    fig, ax = plt.subplots()
    for label, cols in labeled_series:
        ax.semilogy(cols["t"], np.maximum(cols[column], 1e-300), label=label)
    ax.set_xlabel("t")
    ax.set_ylabel(column)
    ax.legend(loc="best", fontsize=7)
    if title:
        ax.set_title(title)
    return _finish(fig, out_path)


def plot_kato(table, out_path):
    """log-log deviation vs regularization index, with the k^-1/2 guide."""
    ks = np.array([row[0] for row in table], dtype=float)
    devs = np.array([row[1] for row in table], dtype=float)
    fig, ax = plt.subplots()
    ax.loglog(ks, devs, "o-", label="measured deviation")
    if np.all(devs > 0):
        guide = devs[0] * np.sqrt(ks[0] / ks)
        ax.loglog(ks, guide, "--", label="k^-1/2 bound slope")
    ax.set_xlabel("regularization k")
    ax.set_ylabel("sup_t deviation")
    ax.legend(loc="best")
    return _finish(fig, out_path)


def plot_picard(distances, out_path):
    """Iterate distances d_m on a log scale."""
    fig, ax = plt.subplots()
    m = np.arange(len(distances))
    ax.semilogy(m, np.maximum(distances, 1e-300), "o-")
    ax.set_xlabel("sweep m")
    ax.set_ylabel("sup-in-time iterate distance")
    return _finish(fig, out_path)
