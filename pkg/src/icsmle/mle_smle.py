"""The ordinary NPMLE for interval censoring, case 2, and its smoothed version.

The NPMLE optimizes the raw (unsmoothed) likelihood over distribution-
function values at the pooled observation points, reusing the EM/ICM hybrid.
Mass between consecutive pooled points is attributed to the right endpoint.
The SMLE is the convolution of the fitted point masses with the integrated
kernel.
"""

from dataclasses import dataclass

import numpy as np

from . import _pooled
from .kernels import integrated_kernel
from .msle_solver import SolverConfig, _icm_core, initial_estimate


@dataclass
class MleSolution:
    """Step-function NPMLE: values at the pooled observation points."""

    points: np.ndarray
    F: np.ndarray
    masses: np.ndarray
    tail_mass: float
    loglik: float
    converged: bool
    iterations: int
    max_kkt_violation: float

    @property
    def support_points(self):
        return self.points[self.masses > 1e-10]

    @property
    def support_masses(self):
        return self.masses[self.masses > 1e-10]

    def cdf(self, x):
        """Right-continuous step-function value at x."""
        idx = np.searchsorted(self.points, np.asarray(x, dtype=float), side="right")
        padded = np.concatenate(([0.0], self.F))
        out = padded[idx]
        return out if np.ndim(x) else float(out)


def _pooled_from_sample(sample):
    """Pooled points and count coefficients of the raw likelihood."""
    rel_t = sample.t[sample.delta != 3]
    rel_u = sample.u[sample.delta != 1]
    points = np.unique(np.concatenate((rel_t, rel_u)))
    a = np.zeros(points.size)
    b = np.zeros(points.size)
    sel1 = sample.delta == 1
    sel3 = sample.delta == 3
    np.add.at(a, np.searchsorted(points, sample.t[sel1]), 1.0)
    np.add.at(b, np.searchsorted(points, sample.u[sel3]), 1.0)
    sel2 = sample.delta == 2
    pi = np.searchsorted(points, sample.t[sel2])
    pj = np.searchsorted(points, sample.u[sel2])
    pairs, counts = np.unique(np.stack((pi, pj)), axis=1, return_counts=True)
    L = _pooled.PooledLikelihood.from_counts(a, b, pairs[0], pairs[1], counts.astype(float))
    return points, L


def _kkt_violation(L, F, floor):
    """Largest self-consistency violation in mass coordinates."""
    mult, _ = _pooled.em_multipliers(L, F, floor)
    W = L.total_weight
    p = np.concatenate((np.diff(F, prepend=0.0), [1.0 - F[-1]]))
    over = float(np.max(mult - W))
    on_support = np.abs(mult - W)[p > 1e-12]
    at = float(np.max(on_support)) if on_support.size else 0.0
    return max(over, at)


def fit_mle(sample, config=None):
    """NPMLE of the event distribution by the EM/ICM hybrid.

    Optimality is certified through the discrete self-consistency
    conditions: the mass-coordinate derivative never exceeds the total
    weight, with equality on the support.
    """
    if sample.n < 1:
        raise ValueError("sample is empty")
    cfg = config or SolverConfig()
    points, L = _pooled_from_sample(sample)
    d = np.ones(points.size)
    F = initial_estimate(points.size, cfg.f_max)
    tol = cfg.fenchel_tol * L.total_weight

    iterations = 0
    violation = _kkt_violation(L, F, cfg.f_floor)
    for _ in range(cfg.max_iters):
        for _ in range(cfg.em_per_cycle):
            F, _ = _pooled.em_update(L, F, cfg.f_floor)
        for _ in range(cfg.icm_per_cycle):
            F, _, _, _, _ = _icm_core(L, F, d, cfg)
        iterations += 1
        violation = _kkt_violation(L, F, cfg.f_floor)
        if violation <= tol:
            break
    masses = np.diff(F, prepend=0.0)
    return MleSolution(points=points, F=F, masses=masses,
                       tail_mass=float(1.0 - F[-1]),
                       loglik=_pooled.loglik(L, F),
                       converged=bool(violation <= tol),
                       iterations=iterations,
                       max_kkt_violation=float(violation))


def mle_loglik(sample, F_at_points):
    """Raw interval-censoring log-likelihood of arbitrary values at the
    pooled points; used for dominance checks against candidates."""
    _, L = _pooled_from_sample(sample)
    return _pooled.loglik(L, np.asarray(F_at_points, dtype=float))


def fit_smle(mle, b, grid):
    """Smoothed MLE: point masses convolved with the integrated kernel."""
    if b <= 0:
        raise ValueError(f"bandwidth must be positive, got {b}")
    tt = grid.eval_points
    ik = integrated_kernel(tt[:, None] - mle.points[None, :], b)
    return ik @ mle.masses
