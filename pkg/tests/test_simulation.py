import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from icsmle.simulation import (SimDesign, draw_sample, montecarlo_normality,
                               rate_study, rep_rng, sample_pair, sample_records)

DESIGN = SimDesign(n=1000, seed=123)
A = 2.0 - 0.1  # triangle width


def g_density(t, u, eps=0.1):
    ok = (t >= 0) & (u <= 2.0) & (u - t >= eps)
    den = (2.0 - t - eps) ** 2 * (2.0 - eps) ** 2
    return np.where(ok, 6.0 * (u - t - eps) ** 2 / np.where(ok, den, 1.0), 0.0)


def g_cell_probability(t0, t1, u0, u1, eps=0.1):
    """Exact-in-u integral of g over a rectangle, t-integral by quadrature."""
    def inner(t):
        lo = max(u0, t + eps)
        hi = min(u1, 2.0)
        if hi <= lo:
            return 0.0
        den = (2.0 - t - eps) ** 2 * (2.0 - eps) ** 2
        return 2.0 * ((hi - t - eps) ** 3 - (lo - t - eps) ** 3) / den
    return quad(inner, t0, min(t1, 2.0 - eps), epsabs=1e-12, limit=200)[0]


def test_pair_support():
    t, u = sample_pair(rep_rng(1, 0), DESIGN, 20000)
    assert np.all(t >= 0) and np.all(t <= A)
    assert np.all(u <= 2.0)
    assert np.all(u - t >= 0.1)  # exact separation by construction


def test_pair_distribution_chi_square():
    rng = rep_rng(77, 0)
    n = 1_000_000
    t, u = sample_pair(rng, DESIGN, n)
    edges = np.linspace(0.0, 2.0, 11)
    counts, _, _ = np.histogram2d(t, u, bins=[edges, edges])
    probs = np.array([[g_cell_probability(edges[i], edges[i + 1], edges[j], edges[j + 1])
                       for j in range(10)] for i in range(10)])
    mask = probs * n >= 5
    obs = np.concatenate((counts[mask], [counts[~mask].sum()]))
    exp = np.concatenate((probs[mask] * n, [max(probs[~mask].sum() * n, 1e-9)]))
    exp *= obs.sum() / exp.sum()
    stat, p = stats.chisquare(obs, exp)
    assert p >= 0.01


def test_first_marginal_ks():
    # closed-form marginal CDF 1 - (1 - t/a)^2; verify it normalizes first
    mass = quad(lambda x: 2 * (A - x) / A**2, 0, A, epsabs=1e-12)[0]
    assert mass == pytest.approx(1.0, abs=1e-10)
    t, _ = sample_pair(rep_rng(5, 0), DESIGN, 200000)
    cdf = lambda x: 1.0 - (1.0 - np.clip(x, 0, A) / A) ** 2
    stat, p = stats.kstest(t, cdf)
    assert p >= 0.01


def test_record_indicators():
    sample = sample_records(rep_rng(9, 0), DESIGN, 100000)
    assert np.isin(sample.delta, (1, 2, 3)).all()
    # P(delta=1 | T in bin) matches the mass-weighted average of F0 over the bin
    edges = np.linspace(0.0, A, 11)
    F0 = lambda x: -np.expm1(-x)
    g1 = lambda x: 2 * (A - x) / A**2
    for i in range(10):
        sel = (sample.t >= edges[i]) & (sample.t < edges[i + 1])
        n_bin = sel.sum()
        p_hat = np.mean(sample.delta[sel] == 1)
        num = quad(lambda x: F0(x) * g1(x), edges[i], edges[i + 1], epsabs=1e-12)[0]
        den = quad(g1, edges[i], edges[i + 1], epsabs=1e-12)[0]
        p_true = num / den
        se = np.sqrt(p_true * (1 - p_true) / n_bin)
        assert abs(p_hat - p_true) <= 3 * se + 1e-12


def test_delta2_probability():
    sample = sample_records(rep_rng(31, 0), DESIGN, 100000)
    p_hat = np.mean(sample.delta == 2)
    F0 = lambda x: -np.expm1(-x)

    def inner(t):
        f = lambda u: (F0(u) - F0(t)) * g_density(t, u)
        return quad(f, t + 0.1, 2.0, epsabs=1e-11)[0]

    p_true = quad(inner, 0.0, A, epsabs=1e-9, limit=200)[0]
    se = np.sqrt(p_true * (1 - p_true) / sample.n)
    assert abs(p_hat - p_true) <= 3 * se


def test_determinism_and_stream_independence():
    s1 = draw_sample(DESIGN, rep=0)
    s2 = draw_sample(DESIGN, rep=0)
    assert np.array_equal(s1.t, s2.t) and np.array_equal(s1.u, s2.u)
    assert np.array_equal(s1.delta, s2.delta)
    s3 = draw_sample(DESIGN, rep=1)
    assert not np.array_equal(s1.t, s3.t)
    # the stream for a replication does not depend on how many reps exist
    a = rep_rng(4, 3).random(5)
    b = rep_rng(4, 3).random(5)
    assert np.array_equal(a, b)


def test_montecarlo_single_rep_flags_variance():
    design = SimDesign(n=60, seed=3, reps=1)
    records, summary = montecarlo_normality(design, v_points=(1.0,))
    assert len(records) == 1
    assert summary["per_v"][0].get("variance_undefined") is True


def test_montecarlo_jobs_invariance():
    design = SimDesign(n=60, seed=3, reps=6)
    rec1, sum1 = montecarlo_normality(design, v_points=(1.0,), jobs=1)
    rec2, sum2 = montecarlo_normality(design, v_points=(1.0,), jobs=2)
    assert rec1 == rec2
    assert sum1 == sum2


def test_rate_study_two_point_slope():
    design = SimDesign(n=100, seed=7, reps=5)
    rows, summary = rate_study(design, [100, 200], estimator="mle", v=1.0)
    r = summary["rmse"]
    want = (np.log(r[1]) - np.log(r[0])) / (np.log(200) - np.log(100))
    assert summary["slope"] == pytest.approx(want, abs=1e-12)
    with pytest.raises(ValueError):
        rate_study(design, [100], estimator="mle")


def test_design_validation():
    with pytest.raises(ValueError):
        SimDesign(n=0, seed=1)
    with pytest.raises(ValueError):
        SimDesign(n=10, eps=1.5)
    assert SimDesign(n=32, bandwidth=0.2).b == 0.2
    assert SimDesign(n=32, bandwidth_const=2.0).b == pytest.approx(2.0 * 32 ** -0.2)
