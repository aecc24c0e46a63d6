"""Shared machinery for weighted interval log-likelihoods.

Both the gridded smoothed criterion and the raw NPMLE criterion have the form

    l(F) = sum_i a_i log F_i + sum_i b_i log(1 - F_i)
           + sum_pairs w_ij log(F_j - F_i),

with nonnegative coefficients; they differ only in where the coefficients
come from (density values times Riemann weights vs. observation counts).
The pair coefficients are stored as COO triplets so the NPMLE case with
thousands of pooled points stays linear in the number of records.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PooledLikelihood:
    """Coefficients of the criterion plus the evaluation weights d.

    d converts F-coordinate gradients into the density-scale nabla
    functions: grad_i l = d_i * nabla_i.  For the NPMLE d is all ones.
    """

    a: np.ndarray
    b: np.ndarray
    pair_i: np.ndarray
    pair_j: np.ndarray
    pair_w: np.ndarray
    d: np.ndarray

    @property
    def m(self):
        return self.a.size

    @property
    def total_weight(self):
        return float(self.a.sum() + self.b.sum() + self.pair_w.sum())

    @classmethod
    def from_densities(cls, dens, grid):
        """Build the discretized smoothed criterion from gridded densities."""
        d = grid.widths
        ii, jj = np.nonzero(dens.h > 0)
        keep = jj > ii
        ii, jj = ii[keep], jj[keep]
        w = dens.h[ii, jj] * d[ii] * d[jj]
        return cls(a=dens.h1 * d, b=dens.h2 * d, pair_i=ii, pair_j=jj, pair_w=w, d=d)

    @classmethod
    def from_counts(cls, a, b, pair_i, pair_j, pair_w):
        """Build the raw NPMLE criterion from per-point counts."""
        a = np.asarray(a, dtype=float)
        return cls(a=a, b=np.asarray(b, dtype=float),
                   pair_i=np.asarray(pair_i, dtype=np.intp),
                   pair_j=np.asarray(pair_j, dtype=np.intp),
                   pair_w=np.asarray(pair_w, dtype=float),
                   d=np.ones(a.size))


def loglik(L, F):
    """Criterion value; -inf when a positive coefficient meets log(<=0)."""
    total = 0.0
    mask = L.a > 0
    if mask.any():
        Fm = F[mask]
        if np.any(Fm <= 0):
            return -np.inf
        total += float(L.a[mask] @ np.log(Fm))
    mask = L.b > 0
    if mask.any():
        Sm = 1.0 - F[mask]
        if np.any(Sm <= 0):
            return -np.inf
        total += float(L.b[mask] @ np.log(Sm))
    if L.pair_w.size:
        diff = F[L.pair_j] - F[L.pair_i]
        if np.any(diff <= 0):
            return -np.inf
        total += float(L.pair_w @ np.log(diff))
    return total


def pair_sums(L, F, floor):
    """One-sided ratio sums of the pair terms at each point.

    Returns (A, B, A2, B2, degeneracies): A_i sums w_ji/(F_i - F_j) over
    j < i, B_i sums w_ij/(F_j - F_i) over j > i, A2/B2 the same with
    squared denominators.  Denominators below `floor` are floored and
    counted as degeneracies.
    """
    m = L.m
    A = np.zeros(m)
    B = np.zeros(m)
    A2 = np.zeros(m)
    B2 = np.zeros(m)
    degen = 0
    if L.pair_w.size:
        diff = F[L.pair_j] - F[L.pair_i]
        bad = diff < floor
        degen = int(np.count_nonzero(bad & (L.pair_w > 0)))
        diff = np.maximum(diff, floor)
        r = L.pair_w / diff
        r2 = r / diff
        A = np.bincount(L.pair_j, weights=r, minlength=m)
        B = np.bincount(L.pair_i, weights=r, minlength=m)
        A2 = np.bincount(L.pair_j, weights=r2, minlength=m)
        B2 = np.bincount(L.pair_i, weights=r2, minlength=m)
    return A, B, A2, B2, degen


def nabla_vec(L, F, floor):
    """The nabla function on the evaluation points.

    Zero by convention wherever F is 0 or 1.  Returns (nabla, degeneracies).
    """
    A, B, A2, B2, degen = pair_sums(L, F, floor)
    degen += int(np.count_nonzero((L.a > 0) & (F < floor)))
    degen += int(np.count_nonzero((L.b > 0) & (1.0 - F < floor)))
    with np.errstate(divide="ignore", invalid="ignore"):
        first = np.where(L.a > 0, L.a / np.maximum(F, floor), 0.0)
        second = np.where(L.b > 0, L.b / np.maximum(1.0 - F, floor), 0.0)
    nab = (first - second + A - B) / L.d
    return np.where((F <= 0.0) | (F >= 1.0), 0.0, nab), degen


def nabla_bar_vec(L, F, floor):
    """The nabla function multiplied through by F(1-F); total function."""
    A, B, _, _, degen = pair_sums(L, F, floor)
    nb = (L.a * (1.0 - F) - L.b * F + F * (1.0 - F) * (A - B)) / L.d
    return nb, degen


def icm_weights_vec(L, F, floor, weight_floor):
    """Diagonal curvature weights of the convex-minorant step."""
    A, B, A2, B2, _ = pair_sums(L, F, floor)
    w = (L.a + L.b - (1.0 - 2.0 * F) * (A - B) + F * (1.0 - F) * (A2 + B2)) / L.d
    return np.maximum(w, weight_floor)


def em_multipliers(L, F, floor):
    """Self-consistency multipliers for every mass cell, tail included.

    Cell c covers the interval between evaluation points c-1 and c; cell m
    is the tail mass beyond the last point.  Returns (mult[m+1], degen).
    """
    m = L.m
    with np.errstate(divide="ignore", invalid="ignore"):
        sa = np.where(L.a > 0, L.a / np.maximum(F, floor), 0.0)
        sb = np.where(L.b > 0, L.b / np.maximum(1.0 - F, floor), 0.0)
    degen = int(np.count_nonzero((L.a > 0) & (F < floor)))
    degen += int(np.count_nonzero((L.b > 0) & (1.0 - F < floor)))
    mult = np.zeros(m + 1)
    # events at or before point k spread over cells 0..k
    rev = np.concatenate((np.cumsum(sa[::-1])[::-1], [0.0]))
    mult += rev
    # events after point k spread over cells k+1..m
    cum_b = np.concatenate(([0.0], np.cumsum(sb)))
    mult += cum_b
    if L.pair_w.size:
        diff = F[L.pair_j] - F[L.pair_i]
        bad = diff < floor
        degen += int(np.count_nonzero(bad & (L.pair_w > 0)))
        r = L.pair_w / np.maximum(diff, floor)
        # events in (point i, point j] spread over cells i+1..j
        edges = np.zeros(m + 2)
        np.add.at(edges, L.pair_i + 1, r)
        np.add.at(edges, L.pair_j + 1, -r)
        mult += np.cumsum(edges)[: m + 1]
    return mult, degen


def em_update(L, F, floor):
    """One self-consistency step in mass coordinates; preserves total mass 1.

    Returns (F_new, degeneracies).
    """
    mult, degen = em_multipliers(L, F, floor)
    p = np.concatenate((np.diff(F, prepend=0.0), [1.0 - F[-1]]))
    p = np.maximum(p, 0.0)
    W = L.total_weight
    if W <= 0:
        return F.copy(), degen
    p_new = p * mult / W
    return np.cumsum(p_new[:-1]), degen
