"""Matplotlib figures rendered next to the delimited report output."""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .witness import Y_PURE_THRESHOLD

WERNER_SEPARABILITY_THRESHOLD = 1.0 / 3.0
WERNER_DETECTABILITY_THRESHOLD = math.sqrt(3.0) / 2.0


def save_profile_figure(path, thetas, ys, theta_star, y_max):
    """Collectibility profile Y(theta) with the pure-state threshold."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(thetas, ys, lw=1.5, label=r"$Y(\theta)$")
    ax.axhline(Y_PURE_THRESHOLD, color="gray", ls="--", lw=1.0, label="1/16 threshold")
    ax.plot([theta_star], [y_max], "o", ms=5, color="crimson",
            label=rf"max $Y$ = {y_max:.4f}")
    ax.set_xlabel(r"$\theta$ [rad]")
    ax.set_ylabel(r"$Y$")
    ax.set_xlim(0.0, math.pi)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_werner_figure(path, ps, w_values, sigmas=None, w_closed=None):
    """Witness along the Werner family with both thresholds marked."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if w_closed is not None:
        dense = np.linspace(0.0, 1.0, 201)
        ax.plot(dense, 0.75 - dense**2, color="0.4", lw=1.2, label=r"$3/4 - p^2$")
    if sigmas is not None:
        ax.errorbar(ps, w_values, yerr=sigmas, fmt="o", ms=4, capsize=3,
                    color="crimson", label="simulated")
    else:
        ax.plot(ps, w_values, "o", ms=4, color="crimson", label="W")
    ax.axhline(0.0, color="black", lw=0.8)
    ax.axvline(WERNER_SEPARABILITY_THRESHOLD, color="tab:blue", ls=":", lw=1.2,
               label=r"separability $p = 1/3$")
    ax.axvline(WERNER_DETECTABILITY_THRESHOLD, color="tab:green", ls="--", lw=1.2,
               label=r"detectability $p = \sqrt{3}/2$")
    ax.set_xlabel(r"$p$")
    ax.set_ylabel(r"$W$")
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_ratio_figure(path, ratios, sigmas=None):
    """Corrected coincidence ratios per projection pair."""
    pairs = [pair for pair, value in ratios.items() if value is not None]
    values = [ratios[pair] for pair in pairs]
    errs = None
    if sigmas is not None:
        errs = [sigmas.get(pair, 0.0) for pair in pairs]
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    xs = np.arange(len(pairs))
    ax.bar(xs, values, yerr=errs, capsize=4, color="steelblue", width=0.55)
    ax.set_xticks(xs)
    ax.set_xticklabels(pairs)
    ax.set_ylabel(r"$\bar{r}_{IJ}$")
    ax.set_ylim(bottom=0.0)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_witness_figure(path, components):
    """Bar chart of the witness value and the terms it is assembled from."""
    names = list(components)
    values = [components[name] for name in names]
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    xs = np.arange(len(names))
    colors = ["crimson" if name == "W" else "steelblue" for name in names]
    ax.bar(xs, values, color=colors, width=0.55)
    ax.axhline(0.0, color="black", lw=0.8)
    ax.set_xticks(xs)
    ax.set_xticklabels(names, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
