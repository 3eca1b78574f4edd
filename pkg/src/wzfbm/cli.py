"""Command-line entry point.

Results go to standard output as CSV (header row first, floats at 17
significant digits so golden files are bit-stable); diagnostics go to
standard error.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure.  The seed defaults to a fixed constant, never the clock, so every
invocation is reproducible unless the caller overrides it.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys

import numpy as np

from . import harness, integration, norms, sde, wong_zakai
from .fbm import CholeskyFactorizationError, TimeGrid, generate_path
from .harness import ExperimentConfig
from .sde import BlowupError
from .wong_zakai import QuadratureError

DEFAULT_SEED = 2029


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _parse_deltas(text: str) -> tuple[float, ...]:
    """Widths as '2^-3..2^-8' (descending dyadic range) or a comma list."""
    m = re.fullmatch(r"2\^(-?\d+)\.\.2\^(-?\d+)", text.strip())
    if m:
        a, b = int(m.group(1)), int(m.group(2))
        step = -1 if b < a else 1
        return tuple(2.0**e for e in range(a, b + step, step))
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ValueError(f"cannot parse deltas {text!r}") from exc


def _read_path_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    """(times, components) from a CSV written by `generate`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "t":
            raise ValueError(f"{path}: expected a header starting with 't'")
        rows = np.array([[float(v) for v in row] for row in reader])
    if rows.size == 0:
        raise ValueError(f"{path}: no data rows")
    return rows[:, 0], rows[:, 1:].T


def _write_report(report: harness.RateReport, out, with_exact: bool, with_ratio: bool = False):
    cols = ["delta", "mean_error", "std_error"]
    if with_exact:
        cols.append("exact")
    if with_ratio:
        cols.append("ratio")
    cols.append("n_paths")
    print(",".join(cols), file=out)
    for row in report.rows:
        vals = [_fmt(row.delta), _fmt(row.mean_error), _fmt(row.std_error)]
        if with_exact:
            vals.append(_fmt(row.exact))
        if with_ratio:
            vals.append(_fmt(row.ratio))
        vals.append(str(row.n_paths))
        print(",".join(vals), file=out)
    print(
        f"# slope={_fmt(report.slope)} intercept={_fmt(report.intercept)} "
        f"r2={_fmt(report.r_squared)}",
        file=out,
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_generate(args) -> int:
    grid = TimeGrid(args.T, args.n)
    path = generate_path(grid, args.H, args.m, args.seed, args.replicate, args.method)
    times = grid.times()
    dest = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(dest)
        writer.writerow(["t"] + [f"component_{j + 1}" for j in range(args.m)])
        for i in range(grid.n + 1):
            writer.writerow([_fmt(times[i])] + [_fmt(v) for v in path.values[:, i]])
    finally:
        if args.out:
            dest.close()
    return 0


def _cmd_theta(args) -> int:
    print(_fmt(wong_zakai.theta(args.x, args.H, args.method)))
    return 0


def _cmd_wz_error(args) -> int:
    n = args.n
    config = ExperimentConfig(
        kind="pointwise_lp",
        H=args.H,
        T=args.t,
        n=n,
        deltas=(args.delta,),
        n_paths=args.paths,
        seed=args.seed,
        p=args.p,
    )
    report = harness.mc_pointwise_error(config, n_workers=args.workers)
    row = report.rows[0]
    print("exact,mc_estimate,std_error")
    print(f"{_fmt(row.exact)},{_fmt(row.mean_error)},{_fmt(row.std_error)}")
    return 0


def _cmd_norms(args) -> int:
    times, comps = _read_path_csv(args.infile)
    if len(times) < 3:
        raise ValueError("need at least 3 grid points")
    step = times[1] - times[0]
    report = norms.besov_report(comps[0], step, args.beta, args.alpha)
    print("norm_1_1mb,norm_beta_inf,norm_2_beta,holder,beta,alpha")
    print(
        ",".join(
            _fmt(v)
            for v in (
                report.norm_1_1mb,
                report.norm_beta_inf,
                report.norm_2_beta,
                report.holder,
                report.beta,
                report.alpha,
            )
        )
    )
    return 0


def _cmd_integrate(args) -> int:
    t_f, f = _read_path_csv(args.f)
    t_g, g = _read_path_csv(args.g)
    if len(t_f) != len(t_g) or not np.allclose(t_f, t_g):
        raise ValueError("integrand and integrator live on different grids")
    step = t_f[1] - t_f[0]
    if args.method == "young":
        running = integration.young_integral(f[0], g[0])
        print("t,integral")
        for ti, vi in zip(t_f, running):
            print(f"{_fmt(ti)},{_fmt(vi)}")
    else:
        value = integration.gls_integral(f[0], g[0], step, args.alpha)
        print("a,b,integral")
        print(f"{_fmt(t_f[0])},{_fmt(t_f[-1])},{_fmt(value)}")
    return 0


def _cmd_sde_converge(args) -> int:
    problem_args: tuple[float, ...] = ()
    if args.problem == "fou":
        problem_args = (args.lam, args.sigma0)
    config = ExperimentConfig(
        kind="sde_rate",
        H=args.H,
        T=args.T,
        n=args.n,
        deltas=_parse_deltas(args.deltas),
        n_paths=args.paths,
        seed=args.seed,
        beta=args.beta,
        problem=args.problem,
        problem_args=problem_args,
    )
    report = harness.mc_sde_rate(config, n_workers=args.workers)
    dest = open(args.out, "w") if args.out else sys.stdout
    try:
        _write_report(report, dest, with_exact=False, with_ratio=True)
    finally:
        if args.out:
            dest.close()
    return 0


_INJECT_RE = re.compile(r"e=(?:(?P<coef>[0-9.eE+-]+)\*)?d\^(?P<exp>[0-9.eE+-]+)")


def _cmd_rate(args) -> int:
    if args.config:
        with open(args.config) as fh:
            config = ExperimentConfig.from_dict(json.load(fh))
    else:
        if args.kind is None or args.H is None:
            raise ValueError("either --config or both --kind and --H are required")
        fields: dict = dict(
            kind=args.kind,
            H=args.H,
            T=args.T,
            n=args.n,
            m=args.m,
            deltas=_parse_deltas(args.deltas),
            n_paths=args.paths,
            seed=args.seed,
            p=args.p,
            independent_noise=args.independent_noise,
        )
        if args.beta is not None:
            fields["beta"] = args.beta
        if args.problem is not None:
            fields["problem"] = args.problem
        config = ExperimentConfig(**fields)
    if args.dump_config:
        print(json.dumps(config.to_dict(), indent=2, sort_keys=True))
        return 0
    if args.inject:
        m = _INJECT_RE.fullmatch(args.inject.strip())
        if not m:
            raise ValueError(f"cannot parse injection {args.inject!r}; expected e=[c*]d^k")
        coef = float(m.group("coef") or 1.0)
        expo = float(m.group("exp"))
        rows = [(d, coef * d**expo) for d in config.deltas]
        slope, intercept, r2 = harness.rate_regression(rows)
        report = harness.RateReport(
            rows=tuple(
                harness.RateRow(delta=d, mean_error=e, std_error=0.0, n_paths=0)
                for d, e in rows
            ),
            slope=slope,
            intercept=intercept,
            r_squared=r2,
        )
        _write_report(report, sys.stdout, with_exact=False)
        return 0
    if config.kind == "pointwise_lp":
        report = harness.mc_pointwise_error(config, n_workers=args.workers)
        _write_report(report, sys.stdout, with_exact=True)
    elif config.kind == "besov_rate":
        report = harness.mc_besov_rate(config, n_workers=args.workers)
        _write_report(report, sys.stdout, with_exact=False)
    elif config.kind == "sde_rate":
        report = harness.mc_sde_rate(config, n_workers=args.workers)
        _write_report(report, sys.stdout, with_exact=False, with_ratio=True)
    else:
        report = harness.theta_scan(config)
        _write_report(report, sys.stdout, with_exact=False)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wzfbm",
        description="Fractional noise smoothing: sampling, error theory, rates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample an fBm path to CSV")
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--n", type=int, required=True, help="number of grid steps")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--replicate", type=int, default=0)
    p.add_argument("--method", choices=["circulant", "cholesky"], default=None)
    p.add_argument("--out", default=None, help="output CSV (default stdout)")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("theta", help="evaluate the error kernel")
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--method", choices=["closed_form", "quadrature"], default="closed_form")
    p.set_defaults(func=_cmd_theta)

    p = sub.add_parser("wz-error", help="exact vs Monte Carlo moment of the driver error")
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--t", type=float, default=1.0, help="evaluation time")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--n", type=int, default=2**11, help="grid steps per unit time")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_wz_error)

    p = sub.add_parser("norms", help="Besov-type norm estimates of a CSV path")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(func=_cmd_norms)

    p = sub.add_parser("integrate", help="pathwise integral of one CSV path against another")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--method", choices=["young", "gls"], default="young")
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=_cmd_integrate)

    p = sub.add_parser("sde-converge", help="Wong-Zakai convergence study for a built-in problem")
    p.add_argument("--problem", choices=sorted(sde.BUILTIN_PROBLEMS), required=True)
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--deltas", default="2^-3..2^-8")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--n", type=int, default=2**11, help="grid steps per unit time")
    p.add_argument("--paths", type=int, default=2000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--lam", type=float, default=1.0, help="fou relaxation rate")
    p.add_argument("--sigma0", type=float, default=1.0, help="fou noise amplitude")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_sde_converge)

    p = sub.add_parser("rate", help="run a rate experiment from flags or a JSON config")
    p.add_argument("--config", default=None, help="JSON file with ExperimentConfig fields")
    p.add_argument("--kind", choices=harness.EXPERIMENT_KINDS, default=None)
    p.add_argument("--H", type=float, default=None)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--n", type=int, default=2**11, help="grid steps per unit time")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--deltas", default="2^-2..2^-7")
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--problem", choices=sorted(sde.BUILTIN_PROBLEMS), default=None)
    p.add_argument("--independent-noise", action="store_true")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--inject", default=None, help="synthetic errors e=[c*]d^k (test hook)")
    p.add_argument("--dump-config", action="store_true")
    p.set_defaults(func=_cmd_rate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        BlowupError,
        QuadratureError,
        CholeskyFactorizationError,
        np.linalg.LinAlgError,
        FloatingPointError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
