"""Greatest convex minorants, weighted isotonic projection, and the
current-status baseline estimator built from a continuous cusum diagram."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import isotonic_regression as _pava

from .duality import MonotoneEstimate
from .kernels import integrated_kernel


@dataclass(frozen=True)
class CusumDiagram:
    """Cumulative-weight abscissae and cumulative-sum ordinates, from (0,0)."""

    W: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        V = np.asarray(self.V, dtype=float)
        if W.shape != V.shape or W.ndim != 1 or W.size < 2:
            raise ValueError("W and V must be equal-length vectors with at least two points")
        if np.any(np.diff(W) <= 0):
            raise ValueError("cumulative weights must be strictly increasing")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "V", V)


def gcm_slopes(diagram):
    """Left derivatives of the greatest convex minorant at W_1..W_m.

    Pool-adjacent-violators on the chord slopes with the weight increments;
    the result is nondecreasing by construction.
    """
    dw = np.diff(diagram.W)
    slopes = np.diff(diagram.V) / dw
    return _pava(slopes, weights=dw, increasing=True).x.copy()


def isotonic_ls(values, weights):
    """Weighted least-squares projection onto nondecreasing vectors."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if np.any(weights <= 0):
        raise ValueError("weights must be positive")
    return _pava(values, weights=weights, increasing=True).x.copy()


def curstat_msle(times, indicators, b, grid):
    """Current-status smoothed-likelihood baseline on the grid.

    Builds the smoothed cusum diagram with integrated-kernel coordinates
    and returns the greatest-convex-minorant slopes clipped to [0, 1].
    """
    if b <= 0:
        raise ValueError(f"bandwidth must be positive, got {b}")
    times = np.asarray(times, dtype=float)
    indicators = np.asarray(indicators, dtype=float)
    if times.size == 0:
        raise ValueError("sample is empty")
    n = times.size
    tt = grid.eval_points
    ik = integrated_kernel(tt[:, None] - times[None, :], b)
    W = ik.sum(axis=1) / n
    V = ik @ indicators / n

    # Collapse stretches with no kernel mass (flat W); the minorant slope
    # there is inherited from the spanning segment.
    W_full = np.concatenate(([0.0], W))
    V_full = np.concatenate(([0.0], V))
    keep = np.concatenate(([True], np.diff(W_full) > 1e-14))
    keep[0] = True
    diagram = CusumDiagram(W=W_full[keep], V=V_full[keep])
    slopes = gcm_slopes(diagram)

    # Value at each original abscissa: slope of the segment it ends in.
    seg = np.searchsorted(diagram.W[1:], W_full[1:], side="left")
    seg = np.clip(seg, 0, slopes.size - 1)
    F = np.clip(slopes[seg], 0.0, 1.0)
    return MonotoneEstimate(grid=grid, F=np.maximum.accumulate(F), converged=True)
