"""Asymptotic constants, the toy estimator, and the linear integral equations.

The local limit theorem for the smoothed-likelihood estimator has variance
sigma(v)^2 = d_F0(v)/sigma1(v) * int K^2 and a bias constant beta(v) built
from second derivatives of the observation sub-densities.  The same
machinery discretizes the linearized equation around the truth (a dense
strictly diagonally dominant system) and the kernel-forced equation whose
solution gives the smoothed-MLE variance approximation.

Model integrals use composite Simpson quadrature on a refined grid; the
toy/linear solvers instead reuse the Riemann discretization of the
criterion so that substituting population quantities reproduces the truth
to machine precision.
"""

from dataclasses import dataclass

import numpy as np

from .kernels import SQUARED_L2, SECOND_MOMENT, scaled_kernel


@dataclass(frozen=True)
class ModelFunctions:
    """Population model: truth, observation density, and derivative tables.

    g1/g2 marginals are integrated out of g by Simpson quadrature. The
    four curvature callables feed the bias constant; when absent they are
    replaced by central finite differences with spacing M/quad_points.
    """

    M: float
    eps: float
    F0: callable
    f0: callable
    g: callable
    quad_points: int = 400
    h01_dd: callable = None   # d^2/dv^2 of F0(v) g1(v)
    h02_dd: callable = None   # d^2/dv^2 of (1 - F0(v)) g2(v)
    h0_dd_right: callable = None  # (t, v) -> d^2/dv^2 of h0(t, v), t < v
    h0_dd_left: callable = None   # (v, u) -> d^2/dv^2 of h0(v, u), v < u
    g1_fn: callable = None    # explicit marginals, for models whose marginals
    g2_fn: callable = None    # are not the integrals of g (synthetic tests)

    def g1(self, x):
        """First marginal of g at x, by quadrature over the second argument."""
        if self.g1_fn is not None:
            return self.g1_fn(x)
        return _quad_nodes_apply(self, x, first_argument=True)

    def g2(self, y):
        """Second marginal of g at y, by quadrature over the first argument."""
        if self.g2_fn is not None:
            return self.g2_fn(y)
        return _quad_nodes_apply(self, y, first_argument=False)


def _simpson_weights(lo, hi, k):
    """Nodes and weights of composite Simpson on [lo, hi] with k intervals."""
    k = max(2, k + (k % 2))
    x = np.linspace(lo, hi, k + 1)
    w = np.ones(k + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= (hi - lo) / (3.0 * k)
    return x, w


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _gauss_weights(lo, hi, k):
    """Composite 10-point Gauss-Legendre nodes and weights on [lo, hi].

    All nodes are interior, so integrands with an integrable singularity
    at an endpoint (the bias constant has a logarithmic one at M) are
    never evaluated at the singular point.
    """
    k = max(1, k // 10)
    edges = np.linspace(lo, hi, k + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return x, w


def _quad_nodes_apply(model, points, first_argument):
    scalar = np.ndim(points) == 0
    points = np.atleast_1d(np.asarray(points, dtype=float))
    out = np.zeros(points.size)
    for idx, p in enumerate(points):
        if first_argument:
            lo, hi = p + model.eps, model.M
            if hi <= lo:
                continue
            x, w = _simpson_weights(lo, hi, model.quad_points)
            out[idx] = float(w @ model.g(np.full_like(x, p), x))
        else:
            lo, hi = 0.0, p - model.eps
            if hi <= lo:
                continue
            x, w = _simpson_weights(lo, hi, model.quad_points)
            out[idx] = float(w @ model.g(x, np.full_like(x, p)))
    return float(out[0]) if scalar else out


def exp_triangle_model(eps=0.1, M=2.0, quad_points=400):
    """The built-in simulation truth: unit exponential events with the
    triangular observation density 6(u-t-eps)^2 / ((2-t-eps)(2-eps))^2.

    Curvature callables are supplied in closed form; the second marginal's
    second derivative grows like 1/(M-y) toward the right endpoint.
    """
    if M != 2.0:
        raise ValueError("the triangular observation density is defined on [0, 2]")
    a = M - eps

    def F0(x):
        return -np.expm1(-np.asarray(x, dtype=float))

    def f0(x):
        return np.exp(-np.asarray(x, dtype=float))

    def g(t, u):
        t = np.asarray(t, dtype=float)
        u = np.asarray(u, dtype=float)
        ok = (t >= 0.0) & (u <= M) & (u - t >= eps)
        den = np.where(ok, (M - t - eps) ** 2 * a**2, 1.0)
        return np.where(ok, 6.0 * (u - t - eps) ** 2 / den, 0.0)

    def g2_parts(y):
        s = np.maximum(M - np.asarray(y, dtype=float), 1e-300)
        val = (6.0 / a**2) * (a - s * s / a - 2.0 * s * np.log(a / s))
        dval = (6.0 / a**2) * (2.0 * s / a + 2.0 * np.log(a / s) - 2.0)
        ddval = (12.0 / a**2) * (1.0 / s - 1.0 / a)
        return val, dval, ddval

    def h01_dd(v):
        v = np.asarray(v, dtype=float)
        return -(2.0 / a**2) * np.exp(-v) * (2.0 + a - v)

    def h02_dd(v):
        g2, dg2, ddg2 = g2_parts(v)
        return np.exp(-np.asarray(v, dtype=float)) * (g2 - 2.0 * dg2 + ddg2)

    def h0_dd_right(t, v):
        """Second derivative in the evaluation point of h0(t, v), t < v."""
        t = np.asarray(t, dtype=float)
        v = np.asarray(v, dtype=float)
        ok = (t >= 0.0) & (v <= M) & (v - t >= eps)
        q = np.where(ok, 1.0 / ((M - t - eps) ** 2 * a**2), 0.0)
        span = v - t - eps
        gval = 6.0 * span**2 * q
        dg = 12.0 * span * q
        ddg = 12.0 * q
        dF = F0(v) - F0(t)
        return -np.exp(-v) * gval + 2.0 * np.exp(-v) * dg + dF * ddg

    def h0_dd_left(v, u):
        """Second derivative in the evaluation point of h0(v, u), v < u."""
        v = np.asarray(v, dtype=float)
        u = np.asarray(u, dtype=float)
        ok = (v >= 0.0) & (u <= M) & (u - v >= eps)
        c = np.where(ok, M - v - eps, 1.0)
        q = np.where(ok, 1.0 / (c**2 * a**2), 0.0)
        qp = np.where(ok, 2.0 / (c**3 * a**2), 0.0)
        qpp = np.where(ok, 6.0 / (c**4 * a**2), 0.0)
        span = u - v - eps
        gval = 6.0 * span**2 * q
        dg = 6.0 * (-2.0 * span * q + span**2 * qp)
        ddg = 6.0 * (2.0 * q - 4.0 * span * qp + span**2 * qpp)
        dF = F0(u) - F0(v)
        return np.exp(-v) * gval - 2.0 * np.exp(-v) * dg + dF * ddg

    return ModelFunctions(M=M, eps=eps, F0=F0, f0=f0, g=g, quad_points=quad_points,
                          h01_dd=h01_dd, h02_dd=h02_dd,
                          h0_dd_right=h0_dd_right, h0_dd_left=h0_dd_left)


def _denominator(model, v):
    return model.g1(v) * (1.0 - model.F0(v)) + model.F0(v) * model.g2(v)


def d_F0(v, model):
    """F0(1-F0) over the delta-weighted marginal mix at v."""
    c0 = _denominator(model, v)
    if np.any(np.asarray(c0) <= 0):
        raise ValueError("g1(v)(1-F0(v)) + F0(v) g2(v) must be positive")
    return model.F0(v) * (1.0 - model.F0(v)) / c0


def _coupling_integrals(v, model, F=None):
    """The two g/(Delta F0) integrals around v, by Simpson on the support."""
    F = model.F0 if F is None else F
    Fv = F(v)

    def ratio(gvals, denom):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(gvals > 0, gvals / np.where(denom > 0, denom, 1.0), 0.0)

    low = 0.0
    if v - model.eps > 0:
        x, w = _simpson_weights(0.0, v - model.eps, model.quad_points)
        low = float(w @ ratio(model.g(x, np.full_like(x, v)), Fv - F(x)))
    up = 0.0
    if v + model.eps < model.M:
        x, w = _simpson_weights(v + model.eps, model.M, model.quad_points)
        up = float(w @ ratio(model.g(np.full_like(x, v), x), F(x) - Fv))
    return low, up


def sigma1(v, model):
    """1 + d_F0(v) times the total coupling integral at v; always >= 1."""
    low, up = _coupling_integrals(v, model)
    return 1.0 + d_F0(v, model) * (low + up)


def sigma_sq(v, model):
    """Limit variance of the smoothed-likelihood estimator at v."""
    return d_F0(v, model) / sigma1(v, model) * SQUARED_L2


def _curvatures(model):
    """The four second-derivative callables, analytic or finite-difference."""
    step = model.M / model.quad_points

    def fd2(fun):
        return lambda *args: (fun(*args[:-1], args[-1] + step)
                              - 2.0 * fun(*args)
                              + fun(*args[:-1], args[-1] - step)) / step**2

    h01_dd = model.h01_dd or fd2(lambda v: model.F0(v) * model.g1(v))
    h02_dd = model.h02_dd or fd2(lambda v: (1.0 - model.F0(v)) * model.g2(v))

    def h0(t, u):
        return (model.F0(u) - model.F0(t)) * model.g(t, u)

    h0_dd_right = model.h0_dd_right or fd2(h0)
    if model.h0_dd_left is None:
        def h0_dd_left(v, u):
            return (h0(v + step, u) - 2.0 * h0(v, u) + h0(v - step, u)) / step**2
    else:
        h0_dd_left = model.h0_dd_left
    return h01_dd, h02_dd, h0_dd_right, h0_dd_left


def beta1(v, model):
    """Bias constant of the decoupled (toy) problem at v."""
    h01_dd, h02_dd, h0_dd_right, h0_dd_left = _curvatures(model)
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    out = np.zeros(v_arr.size)
    for idx, vv in enumerate(v_arr):
        Fv = float(model.F0(vv))
        c0 = float(_denominator(model, vv))
        first = ((1.0 - Fv) * float(h01_dd(vv)) - Fv * float(h02_dd(vv))) / c0
        low = 0.0
        if vv - model.eps > 0:
            x, w = _gauss_weights(0.0, vv - model.eps, model.quad_points)
            low = float(w @ (h0_dd_right(x, np.full_like(x, vv))
                             / (Fv - model.F0(x))))
        up = 0.0
        if vv + model.eps < model.M:
            x, w = _gauss_weights(vv + model.eps, model.M, model.quad_points)
            up = float(w @ (h0_dd_left(np.full_like(x, vv), x)
                            / (model.F0(x) - Fv)))
        d = Fv * (1.0 - Fv) / c0
        out[idx] = (first + d * (low - up)) * SECOND_MOMENT / (2.0 * sigma1(vv, model))
    return out if np.ndim(v) else float(out[0])


def beta(v, model):
    """Full bias constant: beta1 plus the g-weighted coupling correction."""
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    out = np.zeros(v_arr.size)
    for idx, vv in enumerate(v_arr):
        b1v = beta1(vv, model)
        Fv = float(model.F0(vv))
        low = 0.0
        if vv - model.eps > 0:
            x, w = _gauss_weights(0.0, vv - model.eps, model.quad_points)
            low = float(w @ (model.g(x, np.full_like(x, vv)) * beta1(x, model)
                             / (Fv - model.F0(x))))
        up = 0.0
        if vv + model.eps < model.M:
            x, w = _gauss_weights(vv + model.eps, model.M, model.quad_points)
            up = float(w @ (model.g(np.full_like(x, vv), x) * beta1(x, model)
                            / (model.F0(x) - Fv)))
        out[idx] = b1v + d_F0(vv, model) / sigma1(vv, model) * (low + up)
    return out if np.ndim(v) else float(out[0])


@dataclass
class AsymptoticsReport:
    """Theorem constants per evaluation point, plus optional solver output."""

    v: np.ndarray
    d_F0: np.ndarray
    sigma1: np.ndarray
    sigma_sq: np.ndarray
    beta1: np.ndarray
    beta: np.ndarray
    toy: np.ndarray = None
    linear: np.ndarray = None


def compute_report(v_points, model, dens=None, grid=None,
                   with_toy=False, with_linear=False):
    """Evaluate every theorem constant at the given interior points."""
    v = np.atleast_1d(np.asarray(v_points, dtype=float))
    if np.any((v <= 0) | (v >= model.M)):
        raise ValueError("evaluation points must be interior to (0, M)")
    rep = AsymptoticsReport(
        v=v,
        d_F0=np.array([d_F0(x, model) for x in v]),
        sigma1=np.array([sigma1(x, model) for x in v]),
        sigma_sq=np.array([sigma_sq(x, model) for x in v]),
        beta1=np.array([beta1(x, model) for x in v]),
        beta=np.array([beta(x, model) for x in v]),
    )
    if (with_toy or with_linear) and (dens is None or grid is None):
        raise ValueError("toy/linear solutions need smoothed densities and a grid")
    if with_toy:
        rep.toy = toy_estimator(dens, model, grid)
    if with_linear:
        rep.linear = solve_linear_inteq(dens, model, grid)
    return rep


class GridTables:
    """Riemann-sum discretization of the model on the evaluation grid.

    Marginals, denominators and coupling sums all come from the same grid
    sums, so the population version of the toy/linear right-hand side
    cancels exactly.
    """

    def __init__(self, model, grid):
        tt = grid.eval_points
        d = grid.widths
        self.grid = grid
        self.F0 = model.F0(tt)
        self.G = model.g(tt[:, None], tt[None, :])
        dF = self.F0[None, :] - self.F0[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            self.R = np.where(self.G > 0, self.G / np.where(dF > 0, dF, 1.0), 0.0)
        self.dF = dF
        if model.g1_fn is not None and model.g2_fn is not None:
            self.g1R = np.asarray(model.g1_fn(tt), dtype=float)
            self.g2R = np.asarray(model.g2_fn(tt), dtype=float)
        else:
            self.g1R = (self.G * d[None, :]).sum(axis=1)
            self.g2R = (self.G * d[:, None]).sum(axis=0)
        self.c0 = self.g1R * (1.0 - self.F0) + self.F0 * self.g2R
        if np.any(self.c0 <= 0):
            raise ValueError("grid marginal mix has zeros; refine the grid or check the model")
        self.dR = self.F0 * (1.0 - self.F0) / self.c0
        lower = (self.R * d[:, None]).sum(axis=0)
        upper = (self.R * d[None, :]).sum(axis=1)
        self.sigma1R = 1.0 + self.dR * (lower + upper)

    def rhs(self, dens):
        """Right-hand side of the toy and linear equations from estimates."""
        d = self.grid.widths
        first = (dens.h1 * (1.0 - self.F0) - dens.h2 * self.F0) / self.c0
        with np.errstate(divide="ignore", invalid="ignore"):
            HR = np.where(dens.h > 0, dens.h / np.where(self.dF > 0, self.dF, 1.0), 0.0)
        low = (HR * d[:, None]).sum(axis=0)
        up = (HR * d[None, :]).sum(axis=1)
        return first + self.dR * (low - up)

    def system_matrix(self):
        """Dense matrix of the linearized equation; strictly diagonally dominant."""
        d = self.grid.widths
        C = self.dR[:, None] * (self.R.T * d[None, :] + self.R * d[None, :])
        return np.diag(self.sigma1R) - C


def smooth_model_densities(model, b, grid, fine=1600):
    """Noise-free smoothed densities: the estimators' expectations.

    Applies the boundary-corrected kernel weights to the population
    sub-densities by quadrature; useful as an n -> infinity oracle for the
    solver and for deterministic bias studies.
    """
    from .smoothing import corrected_weights, normalize, separation_mask

    x, w = _simpson_weights(0.0, model.M, fine)
    W = corrected_weights(grid.eval_points, x, b, model.M)
    h1 = np.maximum(W @ (w * (model.F0(x) * model.g1(x))), 0.0)
    h2 = np.maximum(W @ (w * ((1.0 - model.F0(x)) * model.g2(x))), 0.0)
    H0 = (model.F0(x)[None, :] - model.F0(x)[:, None]) * model.g(x[:, None], x[None, :])
    h = np.maximum(W @ ((w[:, None] * w[None, :]) * H0) @ W.T, 0.0)
    h *= separation_mask(grid, model.eps)
    return normalize(h1, h2, h, grid, b, model.eps)


def toy_estimator(dens, model, grid):
    """Pointwise solve of the decoupled linear equation around the truth.

    Depends on the unknown truth; used only for validation.  Need not be
    monotone.
    """
    tables = GridTables(model, grid)
    return tables.F0 + tables.rhs(dens) / tables.sigma1R


def solve_linear_inteq(dens, model, grid):
    """Dense solve of the linearized equation around the truth."""
    tables = GridTables(model, grid)
    A = tables.system_matrix()
    x = np.linalg.solve(A, tables.rhs(dens))
    return tables.F0 + x


def solve_smle_phi(t, b, model, grid):
    """Kernel-forced linear equation and the variance approximation it gives.

    Returns (phi on the evaluation grid, sigma_n^2).  The grid must resolve
    the kernel: spacing well below b.
    """
    if b <= 0:
        raise ValueError(f"bandwidth must be positive, got {b}")
    tables = GridTables(model, grid)
    tt = grid.eval_points
    d = grid.widths
    rhs = tables.dR * scaled_kernel(t - tt, b)
    phi = np.linalg.solve(tables.system_matrix(), rhs)
    with np.errstate(divide="ignore", invalid="ignore"):
        dphi2 = (phi[None, :] - phi[:, None]) ** 2
        pair = np.where(tables.G > 0, dphi2 / np.where(tables.dF > 0, tables.dF, 1.0) * tables.G, 0.0)
    var = float(np.sum(phi**2 * tables.g1R / np.maximum(tables.F0, 1e-300) * d)
                + d @ pair @ d
                + np.sum(phi**2 * tables.g2R / np.maximum(1.0 - tables.F0, 1e-300) * d))
    return phi, var


def smle_variance_limit(t, model, b_values, points_per_bandwidth=16):
    """Extrapolate b * sigma_n^2 to bandwidth zero over a halving sequence.

    Uses Richardson extrapolation assuming an expansion in powers of b;
    grids are refined so the kernel is always resolved.
    """
    from .smoothing import Grid

    b_values = sorted(b_values, reverse=True)
    if len(b_values) != 3:
        raise ValueError("extrapolation expects exactly three bandwidths")
    vals = []
    for b in b_values:
        m = int(np.ceil(model.M / (b / points_per_bandwidth) / 2.0) * 2)
        _, var = solve_smle_phi(t, b, model, Grid(M=model.M, m=m))
        vals.append(b * var)
    y1, y2, y3 = vals
    return (8.0 * y3 - 6.0 * y2 + y1) / 3.0, vals
