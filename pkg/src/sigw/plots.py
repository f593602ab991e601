"""Figure rendering for the CLI report commands.

Figures are secondary artifacts written next to the primary CSV/JSON outputs;
everything here is deterministic given its inputs and safe for headless use.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_error_curve(path, grid, mean_err, min_err, max_err, fit=None, xlabel="m"):
    """Log-log error curve with a min/max band and an optional fitted line.

    ``fit`` is (values, label) evaluated on ``grid``.
    """
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.fill_between(grid, min_err, max_err, alpha=0.2, color="tab:blue", label="min/max")
    ax.plot(grid, mean_err, "o-", color="tab:blue", label="mean abs error")
    if fit is not None:
        values, label = fit
        ax.plot(grid, values, "--", color="tab:red", label=label)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("absolute error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_distance_heatmap(path, labels, values, metric_name):
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    image = ax.imshow(np.asarray(values), cmap="viridis")
    ax.set_xticks(range(len(labels)), labels, rotation=90, fontsize=7)
    ax.set_yticks(range(len(labels)), labels, fontsize=7)
    ax.set_title(metric_name)
    fig.colorbar(image, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_embedding_scatter(path, coords, assignments, labels=None):
    coords = np.asarray(coords)
    assignments = np.asarray(assignments)
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    for cluster in np.unique(assignments):
        mask = assignments == cluster
        ax.scatter(coords[mask, 0], coords[mask, 1], s=30, label=f"cluster {cluster}")
    if labels is not None:
        for (x, y), text in zip(coords, labels):
            ax.annotate(str(text), (x, y), fontsize=6, alpha=0.7)
    ax.set_xlabel("mds-1")
    ax.set_ylabel("mds-2")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
