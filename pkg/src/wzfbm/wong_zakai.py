"""Stationary smoothing driver for fBm and its exact moment error theory.

The driver G_delta replaces the rough path w by the running average of its
increments over a window of width delta,

    G_delta(t) = integral_0^t (w(s + delta) - w(s)) / delta ds
               = (1/delta) * (integral_t^{t+delta} w - integral_0^delta w),

which is smooth in t and stationary whenever w has stationary increments.
For a one-dimensional fBm the p-th absolute moment of the error
G_delta(t) - w(t) is known in closed form: it equals
E|Z|^p * delta^{pH} * theta(t/delta)^{p/2} with Z standard normal, where
``theta`` is the double integral over the unit square implemented below.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import binom

from .fbm import SamplePath, TimeGrid, check_hurst

__all__ = [
    "WongZakaiDriver",
    "ErrorProcess",
    "QuadratureError",
    "build_driver",
    "error_process",
    "theta",
    "gaussian_abs_moment",
    "exact_lp_error",
]

#: Direct closed-form evaluation is used below this x; the even asymptotic
#: series (which is free of large-power cancellation) above it.
_SERIES_CUTOFF = 4.0


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


# ---------------------------------------------------------------------------
# theta: the normalized mean-square error kernel
# ---------------------------------------------------------------------------

def _theta_integrand(s: float, u: float, x: float, g: float) -> float:
    return (
        x**g
        + 2.0 * u**g
        + abs(s - u + x) ** g
        - (u + x) ** g
        - abs(u - x) ** g
        - abs(u - s) ** g
    )


def _theta_quadrature(x: float, H: float) -> float:
    """Adaptive tensor-product quadrature of the kernel over the unit square.

    The integrand has kinks along s = u - x, u = x and the diagonal s = u;
    those lines are passed to the 1-d adaptive rule as break points.
    """
    g = 2.0 * H

    def inner(u: float) -> float:
        pts = [p for p in (u - x, u) if 0.0 < p < 1.0]
        val, err = integrate.quad(
            _theta_integrand,
            0.0,
            1.0,
            args=(u, x, g),
            points=sorted(set(pts)) or None,
            epsabs=1e-14,
            epsrel=1e-11,
            limit=200,
        )
        return val

    outer_pts = [x] if 0.0 < x < 1.0 else None
    with warnings.catch_warnings():
        # near-machine tolerances are requested on purpose; quad warns about
        # roundoff instead of failing
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            inner, 0.0, 1.0, points=outer_pts, epsabs=1e-13, epsrel=1e-10, limit=200
        )
    if err > max(1e-10, 1e-8 * abs(val)):
        raise QuadratureError(
            f"theta quadrature at x={x}, H={H} only reached absolute "
            f"tolerance {err:.3e}"
        )
    return val


def _theta_direct(x: float, g: float) -> float:
    """Closed form assembled from antiderivatives of |v|^g; for x < ~4.

    Writing F1(v) = sign(v)|v|^{g+1}/(g+1) and
    F2(v) = |v|^{g+2}/((g+1)(g+2)), the three non-trivial square integrals
    reduce to
        C = F2(x+1) - 2 F2(x) + F2(x-1)         (triangular-density average)
        D = F1(x+1) - F1(x)
        E = F1(x) - F1(x-1)
    and the kernel is x^g + 1/(g/2+1) + C - D - E.
    """
    gp1 = g + 1.0
    gp2 = g + 2.0

    def f1(v: float) -> float:
        return math.copysign(abs(v) ** gp1, v) / gp1

    def f2(v: float) -> float:
        return abs(v) ** gp2 / (gp1 * gp2)

    c = f2(x + 1.0) - 2.0 * f2(x) + f2(x - 1.0)
    d = f1(x + 1.0) - f1(x)
    e = f1(x) - f1(x - 1.0)
    return x**g + 1.0 / (0.5 * g + 1.0) + c - d - e


def _theta_series(x: float, g: float) -> float:
    """Even asymptotic series for large x, accurate to machine precision.

    The closed form cancels catastrophically for large x (terms grow like
    x^{g+2} while the value stays O(1)); expanding the second differences in
    powers of 1/x removes the cancellation.  The series converges for x > 1
    and is used from x >= 4 where ~40 terms reach 1 ulp.
    """
    gp1 = g + 1.0
    gp2 = g + 2.0
    acc = 1.0 / (0.5 * g + 1.0)
    x2 = x * x
    power = x**g / x2  # x^{g + 2 - 2k} at k = 2
    for k in range(2, 301):
        coeff = 2.0 * binom(gp2, 2 * k) / (gp1 * gp2) - 2.0 * binom(gp1, 2 * k - 1) / gp1
        term = coeff * power
        acc += term
        if abs(term) < 1e-17 * abs(acc):
            return acc
        power /= x2
    raise QuadratureError(f"theta series at x={x} did not converge in 300 terms")


@lru_cache(maxsize=4096)
def _theta_closed(x: float, H: float) -> float:
    g = 2.0 * H
    if x >= _SERIES_CUTOFF:
        return _theta_series(x, g)
    return _theta_direct(x, g)


@lru_cache(maxsize=512)
def _theta_quad_cached(x: float, H: float) -> float:
    return _theta_quadrature(x, H)


def theta(x: float, H: float, method: str = "closed_form") -> float:
    """Normalized mean-square error kernel of the smoothing approximation.

    Value of the double integral over the unit square of

        x^{2H} + 2u^{2H} + |s-u+x|^{2H} - (u+x)^{2H} - |u-x|^{2H} - |u-s|^{2H}.

    Continuous and strictly positive on (0, inf); behaves like x^{2H} as
    x -> 0 and tends to 1/(H+1) as x -> infinity.  At H = 1/2 it equals
    x - x^3/3 for x <= 1 and 2/3 beyond.

    method: "closed_form" (default; exact piecewise antiderivatives plus a
    large-x series) or "quadrature" (adaptive 2-d rule, the independent
    cross-check; both agree to better than 1e-8 relative).
    """
    H = check_hurst(H)
    x = float(x)
    if not (x > 0.0) or not np.isfinite(x):
        raise ValueError(f"theta requires x > 0, got {x}")
    if method == "closed_form":
        return _theta_closed(x, H)
    if method == "quadrature":
        return _theta_quad_cached(x, H)
    raise ValueError(f"unknown method {method!r}")


def gaussian_abs_moment(p: float) -> float:
    """E|Z|^p for Z standard normal: 2^{p/2} Gamma((p+1)/2) / sqrt(pi)."""
    p = float(p)
    if p < 1.0:
        raise ValueError(f"moment order must be >= 1, got {p}")
    return 2.0 ** (p / 2.0) * math.gamma((p + 1.0) / 2.0) / math.sqrt(math.pi)


def exact_lp_error(t: float, delta: float, H: float, p: float, method: str = "closed_form") -> float:
    """Exact E|G_delta(t) - w(t)|^p for one-dimensional fBm.

    Equals gaussian_abs_moment(p) * delta^{pH} * theta(t/delta)^{p/2}.
    """
    H = check_hurst(H)
    if t <= 0:
        raise ValueError(f"need t > 0, got {t}")
    if delta <= 0:
        raise ValueError(f"need delta > 0, got {delta}")
    return gaussian_abs_moment(p) * delta ** (p * H) * theta(t / delta, H, method) ** (p / 2.0)


# ---------------------------------------------------------------------------
# The driver on a grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WongZakaiDriver:
    """Smoothed driver G_delta evaluated on the leading part of a base grid.

    ``values[j, i]`` approximates G_delta of component j at t_i, computed by
    the trapezoid rule from the base path, which must extend at least delta
    beyond the driver horizon.
    """

    base: SamplePath
    delta: float
    values: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("driver values must be finite")
        if not np.all(vals[:, 0] == 0.0):
            raise ValueError("driver must start at zero")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def component(self, j: int = 0) -> np.ndarray:
        return self.values[j]


@dataclass(frozen=True)
class ErrorProcess:
    """Pointwise difference G_delta(t_k) - w(t_k) on the driver grid."""

    values: np.ndarray
    delta: float
    H: float
    grid: TimeGrid

    def component(self, j: int = 0) -> np.ndarray:
        return self.values[j]


def _window_steps(delta: float, step: float, *, rtol: float = 1e-9) -> int:
    k = int(round(delta / step))
    if k < 1 or abs(k * step - delta) > rtol * delta:
        raise ValueError(
            f"delta={delta} is not a positive integer multiple of the grid "
            f"step {step}"
        )
    return k


def cumulative_path_integral(values: np.ndarray, step: float) -> np.ndarray:
    """Trapezoid-rule running integral along the last axis, starting at 0."""
    avg = 0.5 * (values[..., 1:] + values[..., :-1]) * step
    out = np.zeros(values.shape)
    np.cumsum(avg, axis=-1, out=out[..., 1:])
    return out


def build_driver(base: SamplePath, delta: float, n_out: int | None = None) -> WongZakaiDriver:
    """Evaluate the smoothed driver on the first ``n_out`` cells of the base grid.

    Uses G_delta(t_i) = (I(t_i + delta) - I(t_i) - I(delta)) / delta with I
    the trapezoid-rule running integral of the base path, so G_delta(0) = 0
    exactly and a linear base path is reproduced exactly.  delta must be an
    integer multiple of the grid step and the base must extend to
    t_{n_out} + delta.
    """
    step = base.grid.step
    k = _window_steps(delta, step)
    if n_out is None:
        n_out = base.grid.n - k
    if n_out < 1:
        raise ValueError("driver horizon must contain at least one step")
    if n_out + k > base.grid.n:
        raise ValueError(
            f"base path ends at step {base.grid.n}, but the driver needs "
            f"{n_out} + {k} steps"
        )
    integral = cumulative_path_integral(base.values, step)
    vals = (integral[:, k : n_out + k + 1] - integral[:, : n_out + 1] - integral[:, [k]]) / delta
    grid = TimeGrid(n_out * step, n_out)
    return WongZakaiDriver(base=base, delta=float(delta), values=vals, grid=grid)


def error_process(driver: WongZakaiDriver) -> ErrorProcess:
    """G_delta(t_k) - w(t_k) on the driver grid."""
    n_out = driver.grid.n
    diff = driver.values - driver.base.values[:, : n_out + 1]
    return ErrorProcess(values=diff, delta=driver.delta, H=driver.base.H, grid=driver.grid)
