"""Samplers for the built-in observation design and desk-scale Monte Carlo
verification of the local normality and rate claims.

The observation pair (T, U) is drawn on the triangle with vertices (0, eps),
(0, 2) and (2-eps, 2) by inverse transform: T from its linear marginal, then
U from the cubic conditional law, so U - T >= eps by construction.  Events
are unit exponentials independent of the pair.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .asymptotics import beta, exp_triangle_model, sigma_sq
from .mle_smle import fit_mle
from .msle_solver import SolverConfig, fit_msle
from .smoothing import CensoredSample, Grid, smooth_sample


@dataclass(frozen=True)
class SimDesign:
    """One Monte Carlo configuration matching the reference figures."""

    n: int
    seed: int = 0
    reps: int = 1
    M: float = 2.0
    eps: float = 0.1
    bandwidth_const: float = 1.0
    bandwidth: float = None
    grid_m: int = 100

    def __post_init__(self):
        if self.n < 1 or self.reps < 1:
            raise ValueError("n and reps must be at least 1")
        if not 0 < self.eps <= self.M / 2:
            raise ValueError("eps must lie in (0, M/2]")

    @property
    def b(self):
        """Bandwidth: explicit value or c * n^(-1/5)."""
        if self.bandwidth is not None:
            return self.bandwidth
        return self.bandwidth_const * self.n ** (-0.2)

    @property
    def grid(self):
        return Grid(M=self.M, m=self.grid_m)

    def model(self, quad_points=None):
        return exp_triangle_model(eps=self.eps, M=self.M,
                                  quad_points=quad_points or 4 * self.grid_m)


def rep_rng(seed, rep):
    """Independent generator for one replication; stable across rep counts."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep,)))


def sample_pair(rng, design, size=None):
    """Observation pairs (t, u) from the triangular density."""
    scalar = size is None
    size = 1 if scalar else size
    a = design.M - design.eps
    t = a * (1.0 - np.sqrt(1.0 - rng.random(size)))
    u = t + design.eps + (a - t) * rng.random(size) ** (1.0 / 3.0)
    if scalar:
        return float(t[0]), float(u[0])
    return t, u


def sample_records(rng, design, size=None):
    """A censored sample: draw (T, U), an independent exponential event,
    and record which of the three intervals the event fell in."""
    n = design.n if size is None else size
    t, u = sample_pair(rng, design, n)
    x = -np.log1p(-rng.random(n))
    delta = np.where(x <= t, 1, np.where(x <= u, 2, 3))
    return CensoredSample(t=t, u=u, delta=delta)


def draw_sample(design, rep=0):
    return sample_records(rep_rng(design.seed, rep), design)


def _fit_one_msle(args):
    design, rep, v_points, cfg = args
    sample = draw_sample(design, rep)
    dens = smooth_sample(sample, design.b, design.grid, eps=design.eps)
    est = fit_msle(dens, design.grid, cfg)
    fhat = np.interp(v_points, design.grid.eval_points, est.F)
    return rep, fhat, bool(est.converged)


def _fit_one_rate(args):
    design, rep, v, estimator, cfg = args
    sample = draw_sample(design, rep)
    if estimator == "mle":
        est = fit_mle(sample, cfg)
        return rep, float(est.cdf(v)), bool(est.converged)
    dens = smooth_sample(sample, design.b, design.grid, eps=design.eps)
    est = fit_msle(dens, design.grid, cfg)
    return rep, float(np.interp(v, design.grid.eval_points, est.F)), bool(est.converged)


def _run_pool(worker, tasks, jobs):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(worker, tasks, chunksize=4))
    else:
        results = [worker(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    return results


def montecarlo_normality(design, v_points=(1.0,), jobs=1, config=None,
                         noncert_budget=0.02):
    """Simulate, smooth and fit over the replications; standardize at each v.

    Non-certified fits are excluded from the statistics; if their share
    exceeds the budget the run is flagged failed.  Returns (records,
    summary): records is one row per (rep, v).
    """
    cfg = config or SolverConfig()
    v_points = np.atleast_1d(np.asarray(v_points, dtype=float))
    tasks = [(design, rep, v_points, cfg) for rep in range(design.reps)]
    results = _run_pool(_fit_one_msle, tasks, jobs)

    model = design.model()
    b = design.b
    sig = np.array([np.sqrt(sigma_sq(v, model)) for v in v_points])
    bias_const = np.array([beta(v, model) for v in v_points])
    F0v = model.F0(v_points)

    records = []
    for rep, fhat, conv in results:
        for k, v in enumerate(v_points):
            z = np.sqrt(design.n * b) * (fhat[k] - F0v[k] - bias_const[k] * b**2) / sig[k]
            records.append({"seed": design.seed, "rep": rep, "n": design.n,
                            "b": b, "v": float(v), "F_hat": float(fhat[k]),
                            "z": float(z), "converged": conv})

    n_bad = sum(1 for r in results if not r[2])
    frac_bad = n_bad / design.reps
    per_v = []
    for k, v in enumerate(v_points):
        fh = np.array([r[1][k] for r in results if r[2]])
        count = fh.size
        entry = {"v": float(v), "count": count, "sigma_sq": float(sig[k] ** 2),
                 "beta": float(bias_const[k]), "predicted_bias": float(bias_const[k] * b**2),
                 "F0": float(F0v[k])}
        if count >= 2:
            var = float(np.var(fh, ddof=1))
            z = np.sqrt(design.n * b) * (fh - F0v[k] - bias_const[k] * b**2) / sig[k]
            ks = stats.kstest(z, "norm")
            entry.update({
                "mean_F_hat": float(fh.mean()),
                "var_F_hat": var,
                "var_ratio": float(design.n * b * var / sig[k] ** 2),
                "mean_bias": float(fh.mean() - F0v[k]),
                "se_mean": float(np.std(fh, ddof=1) / np.sqrt(count)),
                "ks_stat": float(ks.statistic),
                "ks_pvalue": float(ks.pvalue),
            })
            entry["var_ok"] = bool(abs(entry["var_ratio"] - 1.0) <= 0.20)
            entry["ks_ok"] = bool(entry["ks_pvalue"] >= 0.01)
            entry["bias_error"] = float(entry["mean_bias"] - entry["predicted_bias"])
            entry["bias_ok"] = bool(abs(entry["bias_error"]) <= 2.0 * entry["se_mean"])
        else:
            entry.update({"mean_F_hat": float(fh.mean()) if count else np.nan,
                          "var_F_hat": np.nan, "var_ratio": np.nan,
                          "variance_undefined": True})
        per_v.append(entry)
    summary = {"n": design.n, "reps": design.reps, "seed": design.seed, "b": b,
               "nonconverged": n_bad, "nonconverged_frac": frac_bad,
               "convergence_ok": bool(frac_bad <= noncert_budget),
               "per_v": per_v}
    return records, summary


def rate_study(design, n_list, estimator="msle", v=1.0, jobs=1, config=None):
    """RMSE at v across sample sizes and the log-log rate it implies."""
    if len(n_list) < 2:
        raise ValueError("need at least two sample sizes")
    cfg = config or SolverConfig()
    rows = []
    rmse = []
    for n in n_list:
        d_n = replace(design, n=int(n))
        tasks = [(d_n, rep, v, estimator, cfg) for rep in range(design.reps)]
        results = _run_pool(_fit_one_rate, tasks, jobs)
        f0v = float(d_n.model().F0(v))
        errs = np.array([r[1] - f0v for r in results])
        rmse.append(float(np.sqrt(np.mean(errs**2))))
        for rep, fhat, conv in results:
            rows.append({"n": int(n), "rep": rep, "estimator": estimator,
                         "v": v, "F_hat": fhat, "converged": conv})
    slope = float(np.polyfit(np.log(np.asarray(n_list, dtype=float)),
                             np.log(np.asarray(rmse)), 1)[0])
    summary = {"estimator": estimator, "v": v, "n_list": [int(n) for n in n_list],
               "rmse": rmse, "slope": slope, "reps": design.reps, "seed": design.seed}
    return rows, summary
