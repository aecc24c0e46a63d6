"""Boundary-corrected kernel estimates of the observation sub-densities.

Given interval-censored records (t, u, delta) on [0, M], the three
sub-densities are estimated on a uniform grid: h1 from the (t, delta=1)
pairs, h2 from the (u, delta=3) pairs, and the bivariate h from the
(t, u, delta=2) pairs with the boundary correction applied to each kernel
factor separately.  Negative values are clipped to zero and the bivariate
estimate is forced to zero inside the separation gap.
"""

from dataclasses import dataclass

import numpy as np

from .kernels import _alpha_beta, scaled_kernel


@dataclass(frozen=True)
class Grid:
    """Uniform partition 0 = t_0 < t_1 < ... < t_m = M.

    Estimates and distribution-function vectors live on the evaluation
    points t_1..t_m; d_i = t_i - t_{i-1} are the Riemann weights.
    """

    M: float
    m: int

    def __post_init__(self):
        if self.M <= 0:
            raise ValueError(f"M must be positive, got {self.M}")
        if self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")

    @property
    def points(self):
        """All grid points t_0..t_m (length m+1)."""
        return np.linspace(0.0, self.M, self.m + 1)

    @property
    def eval_points(self):
        """Evaluation points t_1..t_m (length m)."""
        return self.points[1:]

    @property
    def widths(self):
        """Cell widths d_1..d_m (all equal to M/m)."""
        return np.full(self.m, self.M / self.m)

    @property
    def spacing(self):
        return self.M / self.m

    def index_of(self, v):
        """Index into eval_points of the grid point closest to v."""
        i = int(round(v / self.spacing)) - 1
        return min(max(i, 0), self.m - 1)


@dataclass(frozen=True)
class CensoredSample:
    """Interval-censored observations: pairs (t, u) with an indicator code.

    delta = 1 if the hidden event is at or before t, 2 if in (t, u],
    3 if after u.
    """

    t: np.ndarray
    u: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        u = np.asarray(self.u, dtype=float)
        d = np.asarray(self.delta, dtype=int)
        if not (t.shape == u.shape == d.shape) or t.ndim != 1:
            raise ValueError("t, u, delta must be one-dimensional arrays of equal length")
        if t.size and not np.all((0.0 <= t) & (t < u)):
            raise ValueError("records must satisfy 0 <= t < u")
        if t.size and not np.isin(d, (1, 2, 3)).all():
            raise ValueError("delta codes must be in {1, 2, 3}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "delta", d)

    @property
    def n(self):
        return self.t.size

    def min_gap(self):
        """Smallest observed u - t; the separation gap for real data."""
        return float(np.min(self.u - self.t))


@dataclass(frozen=True)
class SmoothedDensities:
    """Grid-sampled estimates of h1, h2 and the bivariate h.

    h is an (m, m) matrix over evaluation-point pairs, zero on and below
    the diagonal and inside the separation gap.  Z is the discrete total
    mass the raw estimates were divided by.
    """

    grid: Grid
    h1: np.ndarray
    h2: np.ndarray
    h: np.ndarray
    bandwidth: float
    eps: float
    Z: float = 1.0

    def scaled(self, c):
        """All three estimates multiplied by a positive constant."""
        return SmoothedDensities(grid=self.grid, h1=c * self.h1, h2=c * self.h2,
                                 h=c * self.h, bandwidth=self.bandwidth,
                                 eps=self.eps, Z=self.Z)


def _check_inputs(n, b, grid):
    if n == 0:
        raise ValueError("sample is empty")
    if b <= 0:
        raise ValueError(f"bandwidth must be positive, got {b}")
    if b >= grid.M / 2:
        raise ValueError(f"bandwidth {b} >= M/2 = {grid.M / 2}: boundary windows overlap")


def corrected_weights(points, sources, b, M):
    """Boundary-corrected kernel weights w[i, k] at points[i] for sources[k].

    Interior points use K_b(t - s); points within b of 0 or M use the
    alpha/beta boundary combination, mirrored at the right edge.
    """
    points = np.asarray(points, dtype=float)
    sources = np.asarray(sources, dtype=float)
    base = scaled_kernel(points[:, None] - sources[None, :], b)
    slope = ((points[:, None] - sources[None, :]) / b) * base

    a_coef = np.ones_like(points)
    b_coef = np.zeros_like(points)
    left = points < b
    right = points > M - b
    if np.any(left):
        al, be = _alpha_beta(points[left] / b)
        a_coef[left], b_coef[left] = al, be
    if np.any(right):
        al, be = _alpha_beta((M - points[right]) / b)
        a_coef[right], b_coef[right] = al, -be
    return a_coef[:, None] * base + b_coef[:, None] * slope


def _univariate(values, n, b, grid):
    w = corrected_weights(grid.eval_points, values, b, grid.M)
    return np.maximum(w.sum(axis=1) / n, 0.0)


def estimate_h1(sample, b, grid):
    """Kernel estimate of h1 on the grid, from the (t, delta=1) records."""
    _check_inputs(sample.n, b, grid)
    return _univariate(sample.t[sample.delta == 1], sample.n, b, grid)


def estimate_h2(sample, b, grid):
    """Kernel estimate of h2 on the grid, from the (u, delta=3) records."""
    _check_inputs(sample.n, b, grid)
    return _univariate(sample.u[sample.delta == 3], sample.n, b, grid)


def estimate_h(sample, b, grid, eps):
    """Bivariate kernel estimate of h on grid-point pairs, delta=2 records.

    The boundary correction is applied per kernel factor; entries with
    t_j - t_i < eps are forced to zero regardless of the bandwidth.
    """
    _check_inputs(sample.n, b, grid)
    sel = sample.delta == 2
    wt = corrected_weights(grid.eval_points, sample.t[sel], b, grid.M)
    wu = corrected_weights(grid.eval_points, sample.u[sel], b, grid.M)
    h = (wt @ wu.T) / sample.n
    return np.maximum(h, 0.0) * separation_mask(grid, eps)


def separation_mask(grid, eps):
    """Indicator of grid-point pairs (i, j) with t_j - t_i >= eps."""
    tt = grid.eval_points
    return (tt[None, :] - tt[:, None] >= eps - 1e-12 * grid.M).astype(float)


def estimate_g1(sample, b, grid):
    """Kernel estimate of the first observation-time marginal (no indicators)."""
    _check_inputs(sample.n, b, grid)
    return _univariate(sample.t, sample.n, b, grid)


def estimate_g2(sample, b, grid):
    """Kernel estimate of the second observation-time marginal (no indicators)."""
    _check_inputs(sample.n, b, grid)
    return _univariate(sample.u, sample.n, b, grid)


def estimate_g(sample, b, grid, eps):
    """Bivariate kernel estimate of the observation density g (no indicators)."""
    _check_inputs(sample.n, b, grid)
    wt = corrected_weights(grid.eval_points, sample.t, b, grid.M)
    wu = corrected_weights(grid.eval_points, sample.u, b, grid.M)
    h = (wt @ wu.T) / sample.n
    return np.maximum(h, 0.0) * separation_mask(grid, eps)


def total_mass(h1, h2, h, grid):
    """Discrete total mass: sum (h1+h2) d + double sum h d d."""
    d = grid.widths
    return float(np.sum((h1 + h2) * d) + d @ h @ d)


def normalize(h1, h2, h, grid, bandwidth, eps):
    """Divide all three estimates by their joint discrete mass.

    Returns a SmoothedDensities with the normalization constant recorded.
    """
    if np.any(h1 < 0) or np.any(h2 < 0) or np.any(h < 0):
        raise ValueError("densities must be elementwise nonnegative")
    Z = total_mass(h1, h2, h, grid)
    if Z <= 0:
        raise ValueError("total discrete mass is zero")
    return SmoothedDensities(grid=grid, h1=h1 / Z, h2=h2 / Z, h=h / Z,
                             bandwidth=bandwidth, eps=eps, Z=Z)


def smooth_sample(sample, b, grid, eps=None):
    """Estimate and normalize all three sub-densities in one call.

    If eps is None it is taken as the smallest observed gap u - t.
    """
    if eps is None:
        eps = sample.min_gap()
    h1 = estimate_h1(sample, b, grid)
    h2 = estimate_h2(sample, b, grid)
    h = estimate_h(sample, b, grid, eps)
    return normalize(h1, h2, h, grid, b, eps)
