"""Figure rendering for sweep and mitigation outputs.

Kept apart from the data path on purpose: tables stay plain text and
consumable, figures are a presentation layer on top.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .stats import MODELS


def save_sweep_figure(xs, ys, ses, path, model=None, eps=None, threshold=None,
                      xlabel="size", ylabel="estimate", title=None) -> str:
    """Errorbar plot of a sweep, optionally with a fitted decay curve."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    s = None if ses is None else np.asarray(ses, dtype=float)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.errorbar(x, y, yerr=s, fmt="o", ms=4, capsize=3, label="sampled")
    if model is not None and eps is not None:
        grid = np.linspace(x.min(), x.max(), 200)
        ax.plot(grid, MODELS[model](grid, eps), "-",
                label=f"{model} fit, eps={eps:.4f}")
    if threshold is not None:
        ax.axhline(threshold, color="gray", lw=1, ls="--", label=f"threshold {threshold:.3f}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_counts_figure(raw, corrected, path, title=None) -> str:
    """Grouped bars comparing a counts table before and after correction."""
    keys = sorted(set(raw) | set(corrected))
    xs = np.arange(len(keys))
    r_tot = max(1.0, float(sum(raw.values())))
    c_tot = max(1.0, float(sum(corrected.values())))
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.bar(xs - 0.2, [raw.get(k, 0.0) / r_tot for k in keys], width=0.4, label="raw")
    ax.bar(xs + 0.2, [corrected.get(k, 0.0) / c_tot for k in keys], width=0.4,
           label="corrected")
    ax.set_xticks(xs)
    ax.set_xticklabels(keys, rotation=45 if len(keys) > 8 else 0, fontsize=8)
    ax.set_ylabel("fraction")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
