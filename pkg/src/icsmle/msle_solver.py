"""Maximization of the discretized smoothed log-likelihood.

Three routes: the self-consistency (EM) iteration, the iterative convex
minorant (ICM) step with curvature-diagonal weights and Armijo
backtracking, and the hybrid that alternates the two.  Convergence is
certified by the Fenchel duality conditions, never by step size.
"""

from dataclasses import dataclass

import numpy as np

from . import _pooled
from .duality import MonotoneEstimate, check_fenchel
from .isotonics import CusumDiagram, gcm_slopes


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 500
    fenchel_tol: float = 1e-5
    armijo_c: float = 0.01
    armijo_shrink: float = 0.5
    em_per_cycle: int = 1
    icm_per_cycle: int = 1
    f_floor: float = 1e-12
    weight_floor: float = 1e-10
    max_halvings: int = 60
    f_max: float = 1.0 - 1e-6

    def __post_init__(self):
        if not 0 < self.armijo_c < 1 or not 0 < self.armijo_shrink < 1:
            raise ValueError("Armijo parameters must lie in (0, 1)")
        if self.max_iters <= 0 or self.f_floor <= 0:
            raise ValueError("max_iters and f_floor must be positive")


def initial_estimate(m, f_max=1.0 - 1e-6):
    """Strictly increasing start with all log terms finite."""
    return f_max * np.arange(1, m + 1) / m


def loglik(F, dens, grid):
    """Discretized smoothed log-likelihood; -inf encodes infeasibility."""
    L = _pooled.PooledLikelihood.from_densities(dens, grid)
    return _pooled.loglik(L, np.asarray(F, dtype=float))


def em_step(F, dens, grid, config=None):
    """One self-consistency step.  Keeps the log-likelihood nondecreasing."""
    cfg = config or SolverConfig()
    L = _pooled.PooledLikelihood.from_densities(dens, grid)
    F = np.asarray(F, dtype=float)
    F_new, degen = _pooled.em_update(L, F, cfg.f_floor)
    return MonotoneEstimate(grid=grid, F=F_new, loglik=_pooled.loglik(L, F_new),
                            iterations=1, degeneracies=degen)


def icm_weights(F, dens, grid, config=None):
    """Curvature-diagonal weights of the convex-minorant step, floored."""
    cfg = config or SolverConfig()
    L = _pooled.PooledLikelihood.from_densities(dens, grid)
    return _pooled.icm_weights_vec(L, np.asarray(F, dtype=float),
                                   cfg.f_floor, cfg.weight_floor)


def _icm_core(L, F, d, cfg):
    """One ICM step on a pooled likelihood.

    Returns (F_accepted, candidate, loglik, stalled, degeneracies).
    """
    w = _pooled.icm_weights_vec(L, F, cfg.f_floor, cfg.weight_floor)
    nb, degen = _pooled.nabla_bar_vec(L, F, cfg.f_floor)
    W = np.concatenate(([0.0], np.cumsum(w * d)))
    V = np.concatenate(([0.0], np.cumsum((F * w + nb) * d)))
    candidate = np.clip(gcm_slopes(CusumDiagram(W=W, V=V)), 0.0, 1.0)
    candidate = np.maximum.accumulate(candidate)

    step = candidate - F
    slope = float(np.sum(nb * step * d))
    ll_old = _pooled.loglik(L, F)
    lam = 1.0
    for _ in range(cfg.max_halvings):
        F_try = F + lam * step
        ll_try = _pooled.loglik(L, F_try)
        if np.isfinite(ll_try) and ll_try >= ll_old + cfg.armijo_c * lam * slope:
            return F_try, candidate, ll_try, False, degen
        lam *= cfg.armijo_shrink
    return F.copy(), candidate, ll_old, True, degen


def icm_step(F, dens, grid, config=None):
    """One convex-minorant step with Armijo backtracking on the segment."""
    cfg = config or SolverConfig()
    L = _pooled.PooledLikelihood.from_densities(dens, grid)
    F_new, _, ll, stalled, degen = _icm_core(L, np.asarray(F, dtype=float), grid.widths, cfg)
    return MonotoneEstimate(grid=grid, F=F_new, loglik=ll, iterations=1,
                            stalled=stalled, degeneracies=degen)


def fit_msle(dens, grid, config=None, F_init=None):
    """Hybrid EM/ICM maximization with a Fenchel-certified exit.

    The certificate tolerance is the configured relative tolerance scaled
    by the size of the scaled nabla function at the starting point, so the
    result is invariant to multiplying all densities by a constant.
    """
    cfg = config or SolverConfig()
    L = _pooled.PooledLikelihood.from_densities(dens, grid)
    d = grid.widths
    F = initial_estimate(grid.m, cfg.f_max) if F_init is None else np.asarray(F_init, dtype=float).copy()

    nb0, _ = _pooled.nabla_bar_vec(L, F, cfg.f_floor)
    scale = float(np.max(np.abs(nb0))) if nb0.size else 0.0
    tol = cfg.fenchel_tol * scale
    degen_total = 0
    ascent_ok = True
    ll = _pooled.loglik(L, F)
    report = check_fenchel(F, dens, grid, tol, cfg.f_floor)

    if scale == 0.0:
        return MonotoneEstimate(grid=grid, F=F, loglik=ll, iterations=0,
                                converged=True, fenchel=report)

    iterations = 0
    for _ in range(cfg.max_iters):
        for _ in range(cfg.em_per_cycle):
            F_new, degen = _pooled.em_update(L, F, cfg.f_floor)
            ll_new = _pooled.loglik(L, F_new)
            if ll_new < ll - 1e-10 * max(1.0, abs(ll)):
                ascent_ok = False
            F, ll = F_new, ll_new
            degen_total += degen
        for _ in range(cfg.icm_per_cycle):
            F_new, _, ll_new, stalled, degen = _icm_core(L, F, d, cfg)
            if ll_new < ll - 1e-10 * max(1.0, abs(ll)):
                ascent_ok = False
            F, ll = F_new, ll_new
            degen_total += degen
        iterations += 1
        report = check_fenchel(F, dens, grid, tol, cfg.f_floor)
        if report.passed:
            return MonotoneEstimate(grid=grid, F=F, loglik=ll, iterations=iterations,
                                    converged=True, fenchel=report,
                                    degeneracies=degen_total, ascent_ok=ascent_ok)
    return MonotoneEstimate(grid=grid, F=F, loglik=ll, iterations=iterations,
                            converged=False, fenchel=report,
                            degeneracies=degen_total, ascent_ok=ascent_ok)


def fit_msle_em(dens, grid, iterations, config=None, F_init=None):
    """Pure self-consistency iteration, for cross-checking the hybrid."""
    cfg = config or SolverConfig()
    L = _pooled.PooledLikelihood.from_densities(dens, grid)
    F = initial_estimate(grid.m, cfg.f_max) if F_init is None else np.asarray(F_init, dtype=float).copy()
    nb0, _ = _pooled.nabla_bar_vec(L, F, cfg.f_floor)
    tol = cfg.fenchel_tol * float(np.max(np.abs(nb0))) if nb0.size else 0.0
    degen_total = 0
    for _ in range(iterations):
        F, degen = _pooled.em_update(L, F, cfg.f_floor)
        degen_total += degen
    report = check_fenchel(F, dens, grid, tol, cfg.f_floor)
    return MonotoneEstimate(grid=grid, F=F, loglik=_pooled.loglik(L, F),
                            iterations=iterations, converged=report.passed,
                            fenchel=report, degeneracies=degen_total)
