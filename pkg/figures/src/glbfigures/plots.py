"""Regret-curve and runtime-bar figures from harness run CSVs."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .runcsv import regret_stats, total_runtime_seconds

# log-scale bars cannot show a true zero; clamp to a visible floor
RUNTIME_FLOOR_S = 1e-9


def plot_regret(csv_paths, out_image, title=None):
    """Mean cumulative-regret curves with +-1 std bands, one per policy."""
    stats = [regret_stats(p) for p in csv_paths]
    fig, ax = plt.subplots(figsize=(6, 4))
    for s in stats:
        line, = ax.plot(s.t, s.mean, label=s.label)
        ax.fill_between(s.t, s.mean - s.std, s.mean + s.std,
                        color=line.get_color(), alpha=0.2, linewidth=0)
    ax.set_xlabel("rounds")
    ax.set_ylabel("cumulative regret")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_image, dpi=150)
    plt.close(fig)
    return out_image


def plot_runtime(csv_paths, out_image, title=None):
    """Log-scale bar chart of total wall time per policy."""
    totals = [total_runtime_seconds(p) for p in csv_paths]
    labels = [label for label, _ in totals]
    values = [max(value, RUNTIME_FLOOR_S) for _, value in totals]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(labels, values)
    ax.set_yscale("log")
    ax.set_ylabel("total time (s)")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_image, dpi=150)
    plt.close(fig)
    return out_image
