"""Nabla functionals and the Fenchel optimality certificate for the MSLE.

A monotone candidate maximizes the smoothed criterion if and only if the
cumulative integral of the scaled nabla function is nonnegative everywhere,
the total integral of the raw nabla function vanishes, and the scaled nabla
function vanishes at every point of increase.  These three conditions are
the convergence certificate of the solver.
"""

from dataclasses import dataclass

import numpy as np

from ._pooled import PooledLikelihood, nabla_bar_vec, nabla_vec

DEFAULT_FLOOR = 1e-12
INCREASE_THRESHOLD = 1e-8


@dataclass
class DualityReport:
    """Residuals of the three optimality conditions at a candidate F."""

    nabla: np.ndarray
    nabla_bar: np.ndarray
    cum_nabla_bar: np.ndarray
    total: float
    max_violation: float
    residual_at_increase: float
    tol: float
    degeneracies: int = 0

    @property
    def fenchel1_ok(self):
        return self.max_violation <= self.tol

    @property
    def fenchel2_ok(self):
        return abs(self.total) <= self.tol

    @property
    def fenchel3_ok(self):
        return self.residual_at_increase <= self.tol

    @property
    def passed(self):
        return self.fenchel1_ok and self.fenchel2_ok and self.fenchel3_ok


@dataclass
class MonotoneEstimate:
    """A distribution-function estimate on the grid with solver diagnostics."""

    grid: object
    F: np.ndarray
    loglik: float = np.nan
    iterations: int = 0
    converged: bool = False
    fenchel: DualityReport | None = None
    degeneracies: int = 0
    stalled: bool = False
    ascent_ok: bool = True


def nabla(F, dens, grid, floor=DEFAULT_FLOOR):
    """The nabla function of the smoothed criterion at each grid point.

    Zero by convention where F is 0 or 1; zero-coefficient terms contribute
    nothing regardless of the denominators.
    """
    L = PooledLikelihood.from_densities(dens, grid)
    out, _ = nabla_vec(L, np.asarray(F, dtype=float), floor)
    return out


def nabla_bar(F, dens, grid, floor=DEFAULT_FLOOR):
    """The nabla function multiplied through by F(1-F).

    Well defined also where F hits 0 or 1, where it reduces to h1 or -h2.
    """
    L = PooledLikelihood.from_densities(dens, grid)
    out, _ = nabla_bar_vec(L, np.asarray(F, dtype=float), floor)
    return out


def increase_points(F, threshold=INCREASE_THRESHOLD):
    """Boolean mask of grid points where F strictly increases on both sides.

    A point counts as an increase point only when both adjacent increments
    exceed the threshold (F = 0 before the first point).  One-sided
    increase at the edge of a flat stretch carries a legitimately positive
    one-sided multiplier at the discrete optimum, so it must not be tested
    against zero.  The last point (t = M) is never an increase point for
    the purposes of the certificate.
    """
    F = np.asarray(F, dtype=float)
    inc = np.diff(F, prepend=0.0) > threshold
    mask = np.zeros(F.size, dtype=bool)
    mask[:-1] = inc[:-1] & inc[1:]
    return mask


def check_fenchel(F, dens, grid, tol, floor=DEFAULT_FLOOR):
    """Evaluate the three Fenchel conditions at absolute tolerance tol."""
    F = np.asarray(F, dtype=float)
    L = PooledLikelihood.from_densities(dens, grid)
    nab, deg1 = nabla_vec(L, F, floor)
    nb, deg2 = nabla_bar_vec(L, F, floor)
    d = grid.widths
    cum = np.cumsum(nb * d)
    total = float(np.sum(nab * d))
    max_violation = float(max(0.0, -cum.min())) if cum.size else 0.0
    mask = increase_points(F)
    residual = float(np.max(np.abs(nb[mask]))) if mask.any() else 0.0
    return DualityReport(nabla=nab, nabla_bar=nb, cum_nabla_bar=cum,
                         total=total, max_violation=max_violation,
                         residual_at_increase=residual, tol=tol,
                         degeneracies=max(deg1, deg2))
