"""Command-line front end.

Subcommands cover the pipeline stages: simulate observation data, fit any
of the estimators, evaluate the asymptotic constants, and run the Monte
Carlo and rate experiments.  All numeric output is printed with 12
significant digits; every command is deterministic given its flags and
seed, and --jobs never changes numeric output.

Exit codes: 0 success, 1 usage or input error, 2 numerical non-convergence.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .asymptotics import compute_report, exp_triangle_model
from .isotonics import curstat_msle
from .mle_smle import fit_mle, fit_smle
from .msle_solver import SolverConfig, fit_msle
from .simulation import SimDesign, draw_sample, montecarlo_normality, rate_study
from .smoothing import CensoredSample, Grid, smooth_sample

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONCONVERGED = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x):
    """12-significant-digit representation of one value."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if np.isnan(x):
            return "NaN"
        if np.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(float(x), ".12g")
    raise TypeError(f"not a number: {x!r}")


def json_dumps(obj, indent=0):
    """JSON text with floats at 12 significant digits."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = ",\n".join(f'{pad}  "{k}": {json_dumps(v, indent + 2).lstrip()}'
                           for k, v in obj.items())
        return f"{pad}{{\n{items}\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        vals = list(obj)
        if all(isinstance(v, (int, float, np.integer, np.floating, bool, np.bool_)) for v in vals):
            return pad + "[" + ", ".join(_fmt(v) for v in vals) + "]"
        items = ",\n".join(json_dumps(v, indent + 2) for v in vals)
        return f"{pad}[\n{items}\n{pad}]"
    if obj is None:
        return pad + "null"
    if isinstance(obj, str):
        return pad + '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return pad + _fmt(obj)


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def write_sample_csv(path, sample):
    lines = ["t,u,delta"]
    for t, u, d in zip(sample.t, sample.u, sample.delta):
        lines.append(f"{_fmt(float(t))},{_fmt(float(u))},{int(d)}")
    _write(path, "\n".join(lines) + "\n")


def read_sample_csv(path):
    try:
        raw = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not raw:
        raise UsageError(f"{path}: empty input")
    if raw[0].strip().lower() != "t,u,delta":
        raise UsageError(f"{path}:1: expected header 't,u,delta'")
    t, u, d = [], [], []
    for lineno, line in enumerate(raw[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise UsageError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
        try:
            t.append(float(parts[0]))
            u.append(float(parts[1]))
            d.append(int(parts[2]))
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: {exc}") from exc
    if not t:
        raise UsageError(f"{path}: no data rows")
    try:
        return CensoredSample(t=np.array(t), u=np.array(u), delta=np.array(d))
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _seed(args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("ICENS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"ICENS_SEED must be an integer, got {env!r}") from exc
    return 0


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _load_or_simulate(args):
    """The sample, its separation gap, and whether the truth is known."""
    if args.input is not None and args.n is not None:
        raise UsageError("give either --input or --n, not both")
    if args.input is not None:
        sample = read_sample_csv(args.input)
        eps = args.eps if args.eps is not None else sample.min_gap()
        return sample, eps, False
    if args.n is None:
        raise UsageError("one of --input or --n is required")
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    eps = args.eps if args.eps is not None else 0.1
    design = SimDesign(n=args.n, seed=_seed(args), eps=eps, grid_m=args.m)
    return draw_sample(design), eps, True


def _bandwidth(args, n):
    if args.bandwidth is not None:
        if args.bandwidth <= 0:
            raise UsageError("--bandwidth must be positive")
        return args.bandwidth
    return args.bw_const * n ** (-0.2)


def _solver_config(args):
    return SolverConfig(max_iters=args.max_iters, fenchel_tol=args.fenchel_tol)


def _fit_tsv(path, t, F_hat, truth):
    lines = ["t\tF_hat" + ("\tF0" if truth is not None else "")]
    for i, ti in enumerate(t):
        row = f"{_fmt(float(ti))}\t{_fmt(float(F_hat[i]))}"
        if truth is not None:
            row += f"\t{_fmt(float(truth[i]))}"
        lines.append(row)
    _write(path, "\n".join(lines) + "\n")


def cmd_simulate(args):
    if args.n is None or args.n < 1:
        raise UsageError("--n must be at least 1")
    design = SimDesign(n=args.n, seed=_seed(args), eps=args.eps if args.eps is not None else 0.1)
    sample = draw_sample(design)
    out = Path(args.out)
    write_sample_csv(out / "sample.csv", sample)
    print(f"wrote {out / 'sample.csv'} ({sample.n} records)")
    return EXIT_OK


def cmd_fit(args):
    sample, eps, truth_known = _load_or_simulate(args)
    if args.m < 10:
        raise UsageError("--m must be at least 10")
    if sample.u.max() > args.M:
        raise UsageError(f"observations extend past M={args.M}; pass a larger --M")
    grid = Grid(M=args.M, m=args.m)
    b = _bandwidth(args, sample.n)
    model = exp_triangle_model(eps=eps, M=args.M, quad_points=4 * args.m) if truth_known else None
    truth = model.F0(grid.eval_points) if truth_known else None
    out = Path(args.out)
    cfg = _solver_config(args)
    code = EXIT_OK

    results = {}
    if args.which in ("msle",):
        dens = smooth_sample(sample, b, grid, eps=eps)
        est = fit_msle(dens, grid, cfg)
        rep = est.fenchel
        results["msle"] = {
            "estimator": "msle",
            "grid": grid.eval_points,
            "F": est.F,
            "bandwidth": b,
            "diagnostics": {
                "loglik": est.loglik,
                "iterations": est.iterations,
                "converged": bool(est.converged),
                "fenchel_tol": rep.tol,
                "fenchel_cumulative_violation": rep.max_violation,
                "fenchel_total": rep.total,
                "fenchel_residual_at_increase": rep.residual_at_increase,
                "degeneracies": est.degeneracies,
                "normalization": dens.Z,
                "eps": eps,
            },
        }
        if not est.converged:
            code = EXIT_NONCONVERGED
        _fit_tsv(out / "msle.tsv", grid.eval_points, est.F, truth)
    if args.which in ("mle", "smle"):
        mle = fit_mle(sample, cfg)
        F_grid = mle.cdf(grid.eval_points)
        results["mle"] = {
            "estimator": "mle",
            "grid": grid.eval_points,
            "F": F_grid,
            "bandwidth": None,
            "support_points": mle.support_points,
            "masses": mle.support_masses,
            "tail_mass": mle.tail_mass,
            "diagnostics": {
                "loglik": mle.loglik,
                "iterations": mle.iterations,
                "converged": bool(mle.converged),
                "kkt_violation": mle.max_kkt_violation,
            },
        }
        if not mle.converged:
            code = EXIT_NONCONVERGED
        _fit_tsv(out / "mle.tsv", grid.eval_points, F_grid, truth)
        if args.which == "smle":
            smle = fit_smle(mle, b, grid)
            results["smle"] = {
                "estimator": "smle",
                "grid": grid.eval_points,
                "F": smle,
                "bandwidth": b,
                "diagnostics": {"converged": bool(mle.converged)},
            }
            _fit_tsv(out / "smle.tsv", grid.eval_points, smle, truth)
    if args.which == "curstat-msle":
        # Reduce the pair records to current-status form: first inspection
        # time with the indicator of the event lying at or before it.
        est = curstat_msle(sample.t, (sample.delta == 1).astype(float), b, grid)
        results["curstat-msle"] = {
            "estimator": "curstat-msle",
            "grid": grid.eval_points,
            "F": est.F,
            "bandwidth": b,
            "diagnostics": {"converged": True},
        }
        _fit_tsv(out / "curstat-msle.tsv", grid.eval_points, est.F, truth)

    for name, payload in results.items():
        _write(out / f"{name}.json", json_dumps(payload) + "\n")
        if args.plot:
            from .plots import plot_fit
            plot_fit(grid.eval_points, payload["F"], out / f"{name}.png",
                     truth=truth, label=name, title=f"{name} (n={sample.n})")
    print(f"wrote {', '.join(sorted(str(out / (k + '.json')) for k in results))}")
    return code


def cmd_asymptotics(args):
    v = _float_list(args.v)
    if args.m < 10:
        raise UsageError("--m must be at least 10")
    eps = args.eps if args.eps is not None else 0.1
    model = exp_triangle_model(eps=eps, M=args.M, quad_points=4 * args.m)
    if any(x <= 0 or x >= model.M for x in v):
        raise UsageError(f"evaluation points must lie strictly inside (0, {model.M})")
    dens = grid = None
    if args.with_toy or args.with_linear:
        sample, eps_s, _ = _load_or_simulate(args)
        grid = Grid(M=args.M, m=args.m)
        dens = smooth_sample(sample, _bandwidth(args, sample.n), grid, eps=eps_s)
    rep = compute_report(v, model, dens=dens, grid=grid,
                         with_toy=args.with_toy, with_linear=args.with_linear)
    payload = {
        "v": rep.v, "d_F0": rep.d_F0, "sigma1": rep.sigma1,
        "sigma_sq": rep.sigma_sq, "beta1": rep.beta1, "beta": rep.beta,
    }
    if rep.toy is not None:
        payload["grid"] = grid.eval_points
        payload["toy"] = rep.toy
    if rep.linear is not None:
        payload["grid"] = grid.eval_points
        payload["linear"] = rep.linear
    out = Path(args.out)
    _write(out / "asymptotics.json", json_dumps(payload) + "\n")
    print(f"wrote {out / 'asymptotics.json'}")
    return EXIT_OK


def cmd_montecarlo(args):
    if args.n is None or args.reps is None:
        raise UsageError("--n and --reps are required")
    v = _float_list(args.v)
    design = SimDesign(n=args.n, seed=_seed(args), reps=args.reps,
                       eps=args.eps if args.eps is not None else 0.1,
                       bandwidth_const=args.bw_const, bandwidth=args.bandwidth,
                       grid_m=args.m)
    records, summary = montecarlo_normality(design, v_points=v, jobs=args.jobs,
                                            config=_solver_config(args))
    out = Path(args.out)
    lines = ["seed,rep,n,b,v,F_hat,z,converged"]
    for r in records:
        lines.append(",".join([str(r["seed"]), str(r["rep"]), str(r["n"]),
                               _fmt(r["b"]), _fmt(r["v"]), _fmt(r["F_hat"]),
                               _fmt(r["z"]), "1" if r["converged"] else "0"]))
    _write(out / "montecarlo.csv", "\n".join(lines) + "\n")
    _write(out / "montecarlo.json", json_dumps(summary) + "\n")
    if args.plot:
        from .plots import plot_montecarlo
        z = [r["z"] for r in records if r["converged"]]
        plot_montecarlo(z, out / "montecarlo.png",
                        title=f"standardized residuals (n={args.n}, R={args.reps})")
    print(f"wrote {out / 'montecarlo.csv'}, {out / 'montecarlo.json'}")
    return EXIT_OK if summary["convergence_ok"] else EXIT_NONCONVERGED


def cmd_rate(args):
    n_list = _int_list(args.n)
    if len(n_list) < 2:
        raise UsageError("--n needs at least two sample sizes")
    if args.reps is None:
        raise UsageError("--reps is required")
    estimators = ["msle", "mle"] if args.estimator == "both" else [args.estimator]
    design = SimDesign(n=n_list[0], seed=_seed(args), reps=args.reps,
                       eps=args.eps if args.eps is not None else 0.1,
                       bandwidth_const=args.bw_const, grid_m=args.m)
    out = Path(args.out)
    all_rows = []
    summaries = {}
    for est in estimators:
        rows, summary = rate_study(design, n_list, estimator=est, v=args.v_point,
                                   jobs=args.jobs, config=_solver_config(args))
        all_rows.extend(rows)
        summaries[est] = summary
    lines = ["estimator,n,rep,v,F_hat,converged"]
    for r in all_rows:
        lines.append(",".join([r["estimator"], str(r["n"]), str(r["rep"]),
                               _fmt(r["v"]), _fmt(r["F_hat"]),
                               "1" if r["converged"] else "0"]))
    _write(out / "rate.csv", "\n".join(lines) + "\n")
    _write(out / "rate.json", json_dumps(summaries) + "\n")
    if args.plot:
        from .plots import plot_rate
        plot_rate(n_list, {k: s["rmse"] for k, s in summaries.items()},
                  out / "rate.png", title=f"RMSE at v={args.v_point}")
    print(f"wrote {out / 'rate.csv'}, {out / 'rate.json'}")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="icsmle",
                description="Smoothed and unsmoothed nonparametric likelihood "
                            "estimation for interval-censored data (case 2, separated)")
    sub = p.add_subparsers(dest="command", required=True)

    def common_solver(q):
        q.add_argument("--max-iters", type=int, default=500)
        q.add_argument("--fenchel-tol", type=float, default=1e-5)

    q = sub.add_parser("simulate", help="draw a sample from the built-in design")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--eps", type=float, default=None)
    q.add_argument("--out", default=".")
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("fit", help="fit an estimator to a sample")
    q.add_argument("--which", choices=["msle", "mle", "smle", "curstat-msle"], default="msle")
    q.add_argument("--input", default=None, help="CSV with header t,u,delta")
    q.add_argument("--n", type=int, default=None, help="simulate instead of reading input")
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--m", type=int, default=100)
    q.add_argument("--M", type=float, default=2.0)
    q.add_argument("--bandwidth", type=float, default=None)
    q.add_argument("--bw-const", type=float, default=1.0)
    q.add_argument("--eps", type=float, default=None)
    q.add_argument("--out", default=".")
    q.add_argument("--plot", action="store_true")
    common_solver(q)
    q.set_defaults(func=cmd_fit)

    q = sub.add_parser("asymptotics", help="evaluate the limit constants")
    q.add_argument("--v", required=True, help="comma-separated interior points")
    q.add_argument("--m", type=int, default=100)
    q.add_argument("--M", type=float, default=2.0)
    q.add_argument("--eps", type=float, default=None)
    q.add_argument("--with-toy", action="store_true")
    q.add_argument("--with-linear", action="store_true")
    q.add_argument("--input", default=None)
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--bandwidth", type=float, default=None)
    q.add_argument("--bw-const", type=float, default=1.0)
    q.add_argument("--out", default=".")
    q.set_defaults(func=cmd_asymptotics)

    q = sub.add_parser("montecarlo", help="normality check at interior points")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--reps", type=int, required=True)
    q.add_argument("--v", default="1.0")
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--m", type=int, default=100)
    q.add_argument("--eps", type=float, default=None)
    q.add_argument("--bandwidth", type=float, default=None)
    q.add_argument("--bw-const", type=float, default=1.0)
    q.add_argument("--out", default=".")
    q.add_argument("--plot", action="store_true")
    common_solver(q)
    q.set_defaults(func=cmd_montecarlo)

    q = sub.add_parser("rate", help="log-log RMSE slopes across sample sizes")
    q.add_argument("--n", required=True, help="comma-separated sample sizes")
    q.add_argument("--reps", type=int, required=True)
    q.add_argument("--v", dest="v_point", type=float, default=1.0)
    q.add_argument("--estimator", choices=["msle", "mle", "both"], default="both")
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--m", type=int, default=100)
    q.add_argument("--eps", type=float, default=None)
    q.add_argument("--bw-const", type=float, default=1.0)
    q.add_argument("--out", default=".")
    q.add_argument("--plot", action="store_true")
    common_solver(q)
    q.set_defaults(func=cmd_rate)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
