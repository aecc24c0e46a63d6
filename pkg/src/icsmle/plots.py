"""Matplotlib rendering of fit curves, standardized residuals, and rate plots.

Figures are written next to the delimited output files when plotting is
requested on the command line; all data needed to reproduce them is in the
TSV/CSV output, so the figures are a convenience, not the record.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from scipy import stats


def plot_fit(t, F_hat, path, truth=None, label="estimate", title=None):
    """Fitted distribution function, with the truth overlaid when known."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(t, F_hat, "-", color="tab:blue", label=label)
    if truth is not None:
        ax.plot(t, truth, "--", color="tab:red", label="truth")
    ax.set_xlabel("t")
    ax.set_ylabel("F(t)")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_montecarlo(z, path, title=None):
    """Histogram of standardized residuals against the standard normal."""
    z = np.asarray(z, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.hist(z, bins=30, density=True, color="tab:blue", alpha=0.6, label="standardized residuals")
    xs = np.linspace(-4, 4, 401)
    ax.plot(xs, stats.norm.pdf(xs), "-", color="tab:red", label="N(0,1)")
    ax.set_xlabel("z")
    ax.set_ylabel("density")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_rate(n_list, rmse_by_estimator, path, title=None):
    """Log-log RMSE against sample size, one line per estimator."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    n = np.asarray(n_list, dtype=float)
    for name, rmse in rmse_by_estimator.items():
        slope = np.polyfit(np.log(n), np.log(np.asarray(rmse)), 1)[0]
        ax.loglog(n, rmse, "o-", label=f"{name} (slope {slope:.3f})")
    ax.set_xlabel("n")
    ax.set_ylabel("RMSE")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
