import numpy as np
import pytest

from icsmle.duality import check_fenchel, increase_points, nabla, nabla_bar
from icsmle.msle_solver import fit_msle, loglik
from icsmle.simulation import SimDesign, draw_sample
from icsmle.smoothing import Grid, SmoothedDensities, smooth_sample

GRID = Grid(M=2.0, m=100)


def make_dens(h1, h2, h, eps=0.1):
    return SmoothedDensities(grid=GRID, h1=h1, h2=h2, h=h, bandwidth=0.25, eps=eps)


def test_nabla_cancellation():
    h1 = np.full(GRID.m, 0.3)
    dens = make_dens(h1, h1.copy(), np.zeros((GRID.m, GRID.m)))
    F = np.full(GRID.m, 0.5)
    assert np.all(nabla(F, dens, GRID) == 0.0)
    assert np.all(nabla_bar(F, dens, GRID) == 0.0)


def test_nabla_zero_convention_at_endpoints():
    rng = np.random.default_rng(0)
    h1 = rng.random(GRID.m)
    dens = make_dens(h1, rng.random(GRID.m), np.zeros((GRID.m, GRID.m)))
    F = np.linspace(0.0, 1.0, GRID.m)  # exactly 0 at the first point, 1 at last
    nab = nabla(F, dens, GRID)
    assert nab[0] == 0.0 and nab[-1] == 0.0
    # nabla_bar degenerates to h1 and -h2 there
    nb = nabla_bar(F, dens, GRID)
    assert nb[0] == pytest.approx(dens.h1[0])
    assert nb[-1] == pytest.approx(-dens.h2[-1])


def test_nabla_bar_identity():
    rng = np.random.default_rng(1)
    h1 = rng.random(GRID.m)
    h2 = rng.random(GRID.m)
    h = np.triu(rng.random((GRID.m, GRID.m)), k=6)
    dens = make_dens(h1, h2, h, eps=0.12)
    F = np.sort(rng.uniform(0.05, 0.95, GRID.m))
    nab = nabla(F, dens, GRID)
    nb = nabla_bar(F, dens, GRID)
    assert np.max(np.abs(nb - F * (1 - F) * nab)) <= 1e-12 * max(1.0, np.max(np.abs(nb)))


def test_check_fenchel_exact_plugin_is_optimal():
    # equal sub-densities and no pair term: F = 1/2 solves nabla == 0
    # exactly in floating point, so the certificate passes at tol 0
    h1 = np.full(GRID.m, 0.4)
    dens = make_dens(h1, h1.copy(), np.zeros((GRID.m, GRID.m)))
    F = np.full(GRID.m, 0.5)
    rep = check_fenchel(F, dens, GRID, tol=0.0)
    assert rep.passed
    assert rep.total == 0.0 and rep.max_violation == 0.0


def test_check_fenchel_truth_fails_on_finite_sample():
    design = SimDesign(n=200, seed=8)
    dens = smooth_sample(draw_sample(design), design.b, GRID, eps=0.1)
    F0 = -np.expm1(-GRID.eval_points)
    rep = check_fenchel(F0, dens, GRID, tol=1e-5)
    assert not rep.passed
    assert abs(rep.total) > 1e-3
    # the running sum is self-consistent with its own last entry
    assert rep.cum_nabla_bar[-1] == pytest.approx(
        float(np.sum(rep.nabla_bar * GRID.widths)), rel=1e-12)


def test_converged_estimate_is_certified_and_dominant():
    design = SimDesign(n=200, seed=15)
    dens = smooth_sample(draw_sample(design), design.b, GRID, eps=0.1)
    est = fit_msle(dens, GRID)
    assert est.converged
    rep = est.fenchel
    assert rep.passed and rep.max_violation <= rep.tol
    base = loglik(est.F, dens, GRID)
    rng = np.random.default_rng(2)
    for _ in range(20):
        cand = np.sort(rng.uniform(0.0, 1.0, GRID.m)) * rng.uniform(0.6, 1.0)
        assert base >= loglik(cand, dens, GRID) - 1e-8


def test_increase_points_flat_blocks_excluded():
    F = np.array([0.1, 0.2, 0.2, 0.2, 0.3, 0.4])
    mask = increase_points(F)
    assert mask[0]            # rising on both sides (0 before the grid)
    assert not mask[1]        # enters a flat stretch
    assert not mask[2] and not mask[3]
    assert mask[4]
    assert not mask[5]        # last point never counted


def test_degeneracy_diagnostic():
    h1 = np.full(GRID.m, 0.2)
    h = np.zeros((GRID.m, GRID.m))
    h[10, 30] = 1.0
    dens = make_dens(h1, np.zeros(GRID.m), h, eps=0.1)
    F = np.full(GRID.m, 0.5)  # zero increment where the pair weight sits
    rep = check_fenchel(F, dens, GRID, tol=1e-5)
    assert rep.degeneracies >= 1
