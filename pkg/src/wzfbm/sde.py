"""Pathwise Euler solver for noise-driven systems and the built-in examples.

The solver treats the driving path as data: it never assumes independence of
increments, so the same scheme integrates equations driven by a raw fBm path
(pathwise, Young-type integral in the limit, meaningful for H > 1/2) or by
its smoothed stationary approximation.  Coefficient regularity (Lipschitz
and growth constants) is declared by the caller as metadata and is not
verified here.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

from .fbm import SamplePath, TimeGrid
from .norms import check_beta, vector_norm_beta_inf
from .wong_zakai import WongZakaiDriver

__all__ = [
    "CoefficientConditions",
    "SdeProblem",
    "SolutionPath",
    "BlowupError",
    "solve_euler",
    "kappa",
    "solution_error",
    "linear_problem",
    "additive_problem",
    "fractional_ou_problem",
]


class BlowupError(RuntimeError):
    """State left the finite range during integration."""

    def __init__(self, step_index: int):
        self.step_index = step_index
        super().__init__(f"non-finite state at step {step_index}")


@dataclass(frozen=True)
class CoefficientConditions:
    """Declared (not verified) regularity constants of the coefficients.

    M bounds the Lipschitz constants of the diffusion in space and time, K0
    and zeta its growth |sigma(t,x)| <= K0 (1 + |x|^zeta), L0 and b0_bound
    the drift growth |f(t,x)| <= L0 |x| + b0(t) with b0 in L^rho, rho > 2.
    The caller attests these hold; they are carried as metadata only.
    """

    M: float
    K0: float
    zeta: float
    L0: float
    rho: float
    b0_bound: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.zeta <= 1.0):
            raise ValueError(f"growth exponent zeta must lie in [0, 1], got {self.zeta}")
        if not (self.rho > 2.0):
            raise ValueError(f"drift growth needs rho > 2, got {self.rho}")


@dataclass(frozen=True)
class SdeProblem:
    """du = f(t, u) dt + sigma(t, u) dw with declared coefficient conditions.

    drift maps (t, state) to a state vector, diffusion to an
    (dim_state, dim_noise) matrix; both must be re-entrant (no shared
    mutable state), since Monte Carlo runs call them from worker processes.
    """

    dim_state: int
    dim_noise: int
    drift: Callable[[float, np.ndarray], np.ndarray]
    diffusion: Callable[[float, np.ndarray], np.ndarray]
    x0: np.ndarray
    conditions: CoefficientConditions
    name: str = "custom"

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        if x0.shape != (self.dim_state,):
            raise ValueError(f"x0 shape {x0.shape} does not match dim_state {self.dim_state}")
        if not np.all(np.isfinite(x0)):
            raise ValueError("x0 must be finite")
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)


@dataclass(frozen=True)
class SolutionPath:
    """Euler iterates on a grid, with the identity of the driving path."""

    grid: TimeGrid
    values: np.ndarray
    driver_id: str

    def component(self, i: int = 0) -> np.ndarray:
        return self.values[i]


def _driver_data(driver) -> tuple[np.ndarray, TimeGrid, str]:
    if isinstance(driver, SamplePath):
        ident = (
            f"fbm(H={driver.H}, seed={driver.seed}, replicate={driver.replicate_index}, "
            f"method={driver.method})"
        )
        return driver.values, driver.grid, ident
    if isinstance(driver, WongZakaiDriver):
        base = driver.base
        ident = (
            f"wz(delta={driver.delta}, H={base.H}, seed={base.seed}, "
            f"replicate={base.replicate_index})"
        )
        return driver.values, driver.grid, ident
    raise TypeError(f"driver must be a SamplePath or WongZakaiDriver, got {type(driver)!r}")


def solve_euler(problem: SdeProblem, driver, grid: TimeGrid | None = None) -> SolutionPath:
    """Explicit Euler iteration driven by the increments of `driver`.

    u_{k+1} = u_k + f(t_k, u_k) step + sigma(t_k, u_k) (w(t_{k+1}) - w(t_k)).

    Deterministic given its inputs.  Raises BlowupError with the first bad
    step index if the state leaves the finite range.
    """
    w, wgrid, ident = _driver_data(driver)
    if grid is None:
        grid = wgrid
    elif grid.n != wgrid.n or not grid.compatible(wgrid):
        raise ValueError("requested grid does not match the driver grid")
    if w.shape[0] != problem.dim_noise:
        raise ValueError(
            f"driver has {w.shape[0]} components but the problem expects "
            f"{problem.dim_noise}"
        )
    n = grid.n
    h = grid.step
    times = grid.times()
    dw = np.diff(w, axis=1)
    out = np.empty((problem.dim_state, n + 1))
    x = problem.x0.copy()
    out[:, 0] = x
    for k in range(n):
        x = x + problem.drift(times[k], x) * h + problem.diffusion(times[k], x) @ dw[:, k]
        if not np.all(np.isfinite(x)):
            raise BlowupError(k + 1)
        out[:, k + 1] = x
    return SolutionPath(grid=grid, values=out, driver_id=ident)


def kappa(zeta: float, beta: float) -> float:
    """Norm-growth exponent of the a priori solution bound.

    Piecewise in the diffusion growth exponent zeta:
    1/(1-2*beta) at zeta = 1, zeta/(2-2*beta) on the middle range
    [(1-2*beta)/(1-beta), 1), and 1/(1-beta) below it.
    """
    beta = check_beta(beta)
    if not (0.0 <= zeta <= 1.0):
        raise ValueError(f"zeta must lie in [0, 1], got {zeta}")
    if zeta == 1.0:
        return 1.0 / (1.0 - 2.0 * beta)
    threshold = (1.0 - 2.0 * beta) / (1.0 - beta)
    if zeta >= threshold:
        return zeta / (2.0 - 2.0 * beta)
    return 1.0 / (1.0 - beta)


def solution_error(u_delta: SolutionPath, u: SolutionPath, beta: float) -> float:
    """Besov-sup distance between two solutions on the same grid."""
    if u_delta.grid.n != u.grid.n or not u_delta.grid.compatible(u.grid):
        raise ValueError("solutions live on different grids")
    return vector_norm_beta_inf(u_delta.values - u.values, u.grid.step, beta)


# ---------------------------------------------------------------------------
# Built-in problems for convergence studies
# ---------------------------------------------------------------------------
# Coefficients are module-level functions (bound with functools.partial where
# they carry parameters) so that problems can be shipped to worker processes.

def _zero_drift(t, x):
    return np.zeros_like(x)


def _state_diffusion(t, x):
    return x.reshape(1, 1)


def _const_diffusion(sigma0, t, x):
    return np.full((1, 1), sigma0)


def _relaxation_drift(lam, t, x):
    return -lam * x


def linear_problem(x0: float = 1.0) -> SdeProblem:
    """du = u dw, u(0) = x0; pathwise solution x0 * exp(w(t)) for H > 1/2."""
    return SdeProblem(
        dim_state=1,
        dim_noise=1,
        drift=_zero_drift,
        diffusion=_state_diffusion,
        x0=np.array([x0]),
        conditions=CoefficientConditions(M=1.0, K0=1.0, zeta=1.0, L0=0.0, rho=4.0),
        name="linear",
    )


def additive_problem(x0: float = 0.0) -> SdeProblem:
    """du = dw: the solution is x0 + w(t), so solver errors telescope away."""
    return SdeProblem(
        dim_state=1,
        dim_noise=1,
        drift=_zero_drift,
        diffusion=partial(_const_diffusion, 1.0),
        x0=np.array([x0]),
        conditions=CoefficientConditions(M=1.0, K0=1.0, zeta=0.0, L0=0.0, rho=4.0),
        name="additive",
    )


def fractional_ou_problem(lam: float = 1.0, sigma0: float = 1.0, x0: float = 0.0) -> SdeProblem:
    """Mean-reverting du = -lam * u dt + sigma0 dw."""
    if lam < 0:
        raise ValueError(f"relaxation rate must be non-negative, got {lam}")
    return SdeProblem(
        dim_state=1,
        dim_noise=1,
        drift=partial(_relaxation_drift, lam),
        diffusion=partial(_const_diffusion, sigma0),
        x0=np.array([x0]),
        conditions=CoefficientConditions(M=1.0, K0=abs(sigma0), zeta=0.0, L0=lam, rho=4.0),
        name="fou",
    )


BUILTIN_PROBLEMS = {
    "linear": linear_problem,
    "additive": additive_problem,
    "fou": fractional_ou_problem,
}
