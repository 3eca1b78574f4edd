"""Monte Carlo orchestration, rate regression and experiment pipelines.

An experiment is a declarative config: grid, Hurst parameter, window widths,
replicate count and a base seed.  Replicates are pure functions of
(seed, replicate index), so they can be scheduled on any number of worker
processes and still aggregate to bit-identical reports: results are written
into arrays indexed by replicate and reduced in fixed order.

By default all window widths share the same noise (common random numbers),
which strongly reduces the variance of fitted slopes; a config flag switches
to independent sampling per width.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .fbm import SamplePath, TimeGrid, check_hurst, generate_path
from .norms import check_beta, norm_1_1mb
from .sde import BUILTIN_PROBLEMS, SdeProblem, solution_error, solve_euler
from .wong_zakai import (
    cumulative_path_integral,
    build_driver,
    exact_lp_error,
    theta,
)

__all__ = [
    "ExperimentConfig",
    "RateRow",
    "RateReport",
    "rate_regression",
    "mc_pointwise_error",
    "mc_besov_rate",
    "mc_sde_rate",
    "theta_scan",
    "zero_path_factory",
]

EXPERIMENT_KINDS = ("pointwise_lp", "besov_rate", "sde_rate", "theta_scan")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one rate experiment.

    ``n`` counts grid steps per unit time, so the step is 1/n regardless of
    the horizon T.  ``deltas`` must be sorted in decreasing order and each
    must be an integer multiple of the step (for kind "theta_scan" they are
    the kernel arguments instead and need not be grid-aligned).
    """

    kind: str
    H: float
    T: float = 1.0
    n: int = 2**11
    m: int = 1
    deltas: tuple[float, ...] = ()
    n_paths: int = 2000
    seed: int = 2029
    beta: float | None = None
    p: float = 2.0
    method: str = "circulant"
    independent_noise: bool = False
    problem: str | None = None
    problem_args: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        check_hurst(self.H)
        if self.T <= 0:
            raise ValueError(f"horizon must be positive, got {self.T}")
        if self.m < 1:
            raise ValueError(f"need m >= 1 components, got {self.m}")
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        if not self.deltas:
            raise ValueError("at least one delta is required")
        if any(d <= 0 for d in self.deltas):
            raise ValueError("deltas must be positive")
        if list(self.deltas) != sorted(self.deltas, reverse=True):
            raise ValueError("deltas must be sorted in decreasing order")
        if self.kind != "theta_scan":
            if self.n < 2:
                raise ValueError(f"need n >= 2 grid steps, got {self.n}")
            step = self.step
            for d in self.deltas:
                k = round(d / step)
                if k < 1 or abs(k * step - d) > 1e-9 * d:
                    raise ValueError(
                        f"delta={d} is not an integer multiple of the grid step {step}"
                    )
            if self.n_paths < 2:
                raise ValueError(f"need at least 2 paths, got {self.n_paths}")
        if self.kind in ("besov_rate", "sde_rate"):
            if self.beta is None:
                raise ValueError(f"kind {self.kind!r} requires beta")
            check_beta(self.beta)
            if self.H > 0.5 and not (1.0 - self.H < self.beta < self.H):
                raise ValueError(
                    f"beta={self.beta} lies outside the admissible window "
                    f"({1.0 - self.H}, {self.H}) for H={self.H}; the two-sided "
                    f"rate delta^(H+beta-1) holds only inside it"
                )
        if self.kind == "pointwise_lp":
            if self.p < 1:
                raise ValueError(f"moment order must be >= 1, got p={self.p}")
            if self.m != 1:
                raise ValueError("the exact moment formula is one-dimensional; use m=1")
        if self.kind == "sde_rate":
            if self.problem is not None and self.problem not in BUILTIN_PROBLEMS:
                raise ValueError(f"unknown built-in problem {self.problem!r}")

    @property
    def step(self) -> float:
        return 1.0 / self.n

    def grids(self) -> tuple[TimeGrid, TimeGrid]:
        """(solution grid on [0, T], extended grid reaching T + max delta)."""
        steps = int(round(self.T * self.n))
        grid = TimeGrid(self.T, steps)
        k_max = max(int(round(d / grid.step)) for d in self.deltas)
        return grid, grid.extended(k_max)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["deltas"] = list(self.deltas)
        d["problem_args"] = list(self.problem_args)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "deltas" in d:
            d["deltas"] = tuple(d["deltas"])
        if "problem_args" in d:
            d["problem_args"] = tuple(d["problem_args"])
        return cls(**d)


@dataclass(frozen=True)
class RateRow:
    delta: float
    mean_error: float
    std_error: float
    n_paths: int
    exact: float | None = None
    ratio: float | None = None


@dataclass(frozen=True)
class RateReport:
    rows: tuple[RateRow, ...]
    slope: float
    intercept: float
    r_squared: float
    slope_se: float = float("nan")

    def deltas(self) -> np.ndarray:
        return np.array([r.delta for r in self.rows])

    def means(self) -> np.ndarray:
        return np.array([r.mean_error for r in self.rows])


# ---------------------------------------------------------------------------
# Regression
# ---------------------------------------------------------------------------

def rate_regression(rows) -> tuple[float, float, float]:
    """Ordinary least squares of log(error) on log(delta).

    rows: iterable of (delta, error) pairs with at least two distinct deltas
    and strictly positive errors.  Returns (slope, intercept, r_squared).
    """
    rows = list(rows)
    deltas = np.array([r[0] for r in rows], dtype=float)
    errors = np.array([r[1] for r in rows], dtype=float)
    if len(np.unique(deltas)) < 2:
        raise ValueError("rate regression needs at least two distinct deltas")
    if np.any(errors <= 0):
        raise ValueError("rate regression needs strictly positive errors")
    x = np.log(deltas)
    y = np.log(errors)
    xc = x - x.mean()
    slope = float(xc @ (y - y.mean()) / (xc @ xc))
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float((resid**2).sum())
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res < 1e-28 else 0.0
    else:
        r2 = max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return slope, intercept, r2


def _jackknife_slope_se(samples: np.ndarray, deltas: np.ndarray) -> float:
    """Leave-one-replicate-out standard error of the fitted slope.

    samples: (replicates, deltas) matrix of per-path errors.  The slope is
    linear in the log of the per-delta means, so all leave-one-out slopes
    are computed vectorized.
    """
    r = samples.shape[0]
    if r < 2:
        return float("nan")
    x = np.log(deltas)
    xc = x - x.mean()
    coef = xc / (xc @ xc)
    totals = samples.sum(axis=0)
    loo_means = (totals[None, :] - samples) / (r - 1)
    if np.any(loo_means <= 0):
        return float("nan")
    slopes = np.log(loo_means) @ coef
    center = slopes.mean()
    return float(np.sqrt((r - 1) / r * ((slopes - center) ** 2).sum()))


# ---------------------------------------------------------------------------
# Replicate workers (module-level so process pools can pickle them)
# ---------------------------------------------------------------------------

def zero_path_factory(grid: TimeGrid, H: float, m: int, seed: int, replicate: int) -> SamplePath:
    """Test hook: an identically-zero 'path' with valid metadata."""
    return SamplePath(
        grid=grid,
        m=m,
        values=np.zeros((m, grid.n + 1)),
        H=H,
        seed=seed,
        replicate_index=replicate,
        method="cholesky",
    )


def _default_factory(method):
    def factory(grid, H, m, seed, replicate, _method=method):
        return generate_path(grid, H, m, seed, replicate, _method)

    return factory


def _make_path(config: ExperimentConfig, grid_ext: TimeGrid, replicate: int, factory):
    if factory is None:
        return generate_path(grid_ext, config.H, config.m, config.seed, replicate, config.method)
    return factory(grid_ext, config.H, config.m, config.seed, replicate)


def _delta_steps(config: ExperimentConfig, grid: TimeGrid) -> list[int]:
    return [int(round(d / grid.step)) for d in config.deltas]


def _pointwise_chunk(args) -> np.ndarray:
    """|G_delta(T) - w(T)|^p for a range of replicates; shape (reps, deltas)."""
    config, start, stop, factory = args
    grid, grid_ext = config.grids()
    ks = _delta_steps(config, grid)
    i_t = grid.n
    out = np.empty((stop - start, len(ks)))
    for row, rep in enumerate(range(start, stop)):
        path = integral = None
        for col, (delta, k) in enumerate(zip(config.deltas, ks)):
            if path is None or config.independent_noise:
                rep_eff = rep * len(ks) + col if config.independent_noise else rep
                path = _make_path(config, grid_ext, rep_eff, factory)
                integral = cumulative_path_integral(path.values[0], grid.step)
            err = (integral[i_t + k] - integral[i_t] - integral[k]) / delta - path.values[0, i_t]
            out[row, col] = abs(err) ** config.p
    return out


def _besov_chunk(args) -> np.ndarray:
    """Discrete integrator-norm of the error process per replicate and delta."""
    config, start, stop, factory = args
    grid, grid_ext = config.grids()
    ks = _delta_steps(config, grid)
    n = grid.n
    out = np.empty((stop - start, len(ks)))
    for row, rep in enumerate(range(start, stop)):
        path = None
        if not config.independent_noise:
            path = _make_path(config, grid_ext, rep, factory)
            integral = cumulative_path_integral(path.values, grid.step)
        for col, (delta, k) in enumerate(zip(config.deltas, ks)):
            if config.independent_noise:
                path = _make_path(config, grid_ext, rep * len(ks) + col, factory)
                integral = cumulative_path_integral(path.values, grid.step)
            g_vals = (integral[:, k : n + k + 1] - integral[:, : n + 1] - integral[:, [k]]) / delta
            diff = g_vals - path.values[:, : n + 1]
            out[row, col] = max(
                norm_1_1mb(diff[j], grid.step, config.beta) for j in range(config.m)
            )
    return out


def _sde_chunk(args) -> np.ndarray:
    """(solution error, driver error, ratio) per replicate and delta."""
    config, start, stop, factory, problem = args
    if problem is None:
        problem = BUILTIN_PROBLEMS[config.problem](*config.problem_args)
    grid, grid_ext = config.grids()
    ks = _delta_steps(config, grid)
    n = grid.n
    out = np.empty((stop - start, len(ks), 3))
    for row, rep in enumerate(range(start, stop)):
        path = _make_path(config, grid_ext, rep, factory)
        restricted = SamplePath(
            grid=grid,
            m=config.m,
            values=path.values[:, : n + 1],
            H=config.H,
            seed=path.seed,
            replicate_index=path.replicate_index,
            method=path.method,
        )
        u_ref = solve_euler(problem, restricted)
        for col, delta in enumerate(config.deltas):
            driver = build_driver(path, delta, n_out=n)
            u_delta = solve_euler(problem, driver)
            err = solution_error(u_delta, u_ref, config.beta)
            diff = driver.values - path.values[:, : n + 1]
            drv = max(norm_1_1mb(diff[j], grid.step, config.beta) for j in range(config.m))
            out[row, col, 0] = err
            out[row, col, 1] = drv
            out[row, col, 2] = err / drv if drv > 0 else np.nan
    return out


def _run_replicates(worker, extra, config: ExperimentConfig, n_workers: int | None) -> np.ndarray:
    """Map a chunk worker over all replicates, deterministically ordered."""
    n_paths = config.n_paths
    if n_workers is None:
        n_workers = os.cpu_count() or 1
    n_workers = max(1, min(n_workers, n_paths))
    chunk = max(1, math.ceil(n_paths / (4 * n_workers)))
    bounds = [(s, min(s + chunk, n_paths)) for s in range(0, n_paths, chunk)]
    tasks = [(config, s, e, *extra) for s, e in bounds]
    if n_workers == 1:
        parts = [worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(worker, tasks))
    return np.concatenate(parts, axis=0)


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def _safe_regression(deltas, means, samples):
    """Regression of the report, or NaNs when it is undefined.

    Unlike rate_regression (which raises), reports tolerate degenerate
    inputs: a single width, or identically-zero errors from stub drivers.
    """
    if len(set(deltas)) >= 2 and np.all(means > 0):
        slope, intercept, r2 = rate_regression(list(zip(deltas, means)))
        se = _jackknife_slope_se(samples, np.asarray(deltas))
    else:
        slope = intercept = r2 = se = float("nan")
    return slope, intercept, r2, se


def mc_pointwise_error(
    config: ExperimentConfig, n_workers: int | None = None, path_factory=None
) -> RateReport:
    """Monte Carlo E|G_delta(T) - w(T)|^p per delta, against the exact value.

    Rows carry the sample mean, its standard error and the closed-form
    moment; the slope is fitted on the log means.  With common random
    numbers (default) all deltas see the same paths.
    """
    if config.kind != "pointwise_lp":
        raise ValueError(f"config kind {config.kind!r} is not 'pointwise_lp'")
    samples = _run_replicates(_pointwise_chunk, (path_factory,), config, n_workers)
    means = samples.mean(axis=0)
    ses = samples.std(axis=0, ddof=1) / np.sqrt(config.n_paths)
    slope, intercept, r2, slope_se = _safe_regression(config.deltas, means, samples)
    rows = tuple(
        RateRow(
            delta=d,
            mean_error=float(mu),
            std_error=float(se),
            n_paths=config.n_paths,
            exact=exact_lp_error(config.T, d, config.H, config.p),
        )
        for d, mu, se in zip(config.deltas, means, ses)
    )
    return RateReport(rows=rows, slope=slope, intercept=intercept, r_squared=r2, slope_se=slope_se)


def mc_besov_rate(
    config: ExperimentConfig, n_workers: int | None = None, path_factory=None
) -> RateReport:
    """Monte Carlo mean of the discrete integrator norm of the error process.

    The fitted slope estimates the convergence rate H + beta - 1 predicted
    for beta inside (1-H, H).  For multi-component paths the maximum of the
    component norms is used.
    """
    if config.kind != "besov_rate":
        raise ValueError(f"config kind {config.kind!r} is not 'besov_rate'")
    samples = _run_replicates(_besov_chunk, (path_factory,), config, n_workers)
    means = samples.mean(axis=0)
    ses = samples.std(axis=0, ddof=1) / np.sqrt(config.n_paths)
    slope, intercept, r2, slope_se = _safe_regression(config.deltas, means, samples)
    rows = tuple(
        RateRow(delta=d, mean_error=float(mu), std_error=float(se), n_paths=config.n_paths)
        for d, mu, se in zip(config.deltas, means, ses)
    )
    return RateReport(rows=rows, slope=slope, intercept=intercept, r_squared=r2, slope_se=slope_se)


def mc_sde_rate(
    config: ExperimentConfig,
    problem: SdeProblem | None = None,
    n_workers: int | None = None,
    path_factory=None,
) -> RateReport:
    """Wong-Zakai convergence study for a noise-driven system.

    The reference solution uses the raw path on the finest grid; the
    approximating solutions reuse the same grid with the smoothed driver, so
    the reported error isolates the driver perturbation from the common
    discretization error.  Rows carry the mean solution error and the mean
    path-by-path ratio (solution error) / (driver error), the boundedness of
    which is the content of the stability theory.
    """
    if config.kind != "sde_rate":
        raise ValueError(f"config kind {config.kind!r} is not 'sde_rate'")
    if problem is None and config.problem is None:
        raise ValueError("no problem given: set config.problem or pass one explicitly")
    if problem is not None and config.m != problem.dim_noise:
        raise ValueError(
            f"config has m={config.m} noise components, problem expects {problem.dim_noise}"
        )
    samples = _run_replicates(_sde_chunk, (path_factory, problem), config, n_workers)
    errs = samples[:, :, 0]
    means = errs.mean(axis=0)
    ses = errs.std(axis=0, ddof=1) / np.sqrt(config.n_paths)
    ratios = samples[:, :, 2].mean(axis=0)
    slope, intercept, r2, slope_se = _safe_regression(config.deltas, means, errs)
    rows = tuple(
        RateRow(
            delta=d,
            mean_error=float(mu),
            std_error=float(se),
            n_paths=config.n_paths,
            ratio=float(rt),
        )
        for d, mu, se, rt in zip(config.deltas, means, ses, ratios)
    )
    return RateReport(rows=rows, slope=slope, intercept=intercept, r_squared=r2, slope_se=slope_se)


def theta_scan(config: ExperimentConfig) -> RateReport:
    """Evaluate the error kernel on the config's argument list.

    Deterministic; ``deltas`` double as the kernel arguments x.  The fitted
    slope is the log-log slope of theta over the scanned range (2H in the
    small-x regime, 0 in the plateau).
    """
    if config.kind != "theta_scan":
        raise ValueError(f"config kind {config.kind!r} is not 'theta_scan'")
    values = [theta(x, config.H) for x in config.deltas]
    slope, intercept, r2 = rate_regression(list(zip(config.deltas, values)))
    rows = tuple(
        RateRow(delta=x, mean_error=v, std_error=0.0, n_paths=0)
        for x, v in zip(config.deltas, values)
    )
    return RateReport(rows=rows, slope=slope, intercept=intercept, r_squared=r2)
