"""Exact sampling of fractional Brownian motion on uniform grids.

Sampling is exact in the sense that the sampled vector has precisely the
finite-dimensional Gaussian law prescribed by the fBm covariance.  Two
samplers are provided: circulant embedding of the increment covariance
(O(n log n), the default for long grids) and Cholesky factorization of the
increment covariance (O(n^3) setup, exact for any grid length).  Streams are
counter-based so that Monte Carlo replicates can be generated in any order,
on any number of workers, with bit-identical results.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "TimeGrid",
    "SamplePath",
    "CholeskyFactorizationError",
    "check_hurst",
    "covariance",
    "generate_path",
    "empirical_covariance",
    "path_rng",
]

#: Relative eigenvalue floor for the circulant embedding.  Eigenvalues below
#: -EIG_TOL * max(eig) trigger the Cholesky fallback; ones in [-tol, 0) are
#: clipped to zero.
EIG_TOL = 1e-10


class CholeskyFactorizationError(RuntimeError):
    """Covariance matrix was numerically non-positive-definite."""


def check_hurst(H: float) -> float:
    """Validate a Hurst parameter, returning it as a float."""
    H = float(H)
    if not (0.0 < H < 1.0) or not np.isfinite(H):
        raise ValueError(f"Hurst parameter must lie in (0, 1), got {H}")
    return H


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0 = t_0 < t_1 < ... < t_n = T."""

    T: float
    n: int

    def __post_init__(self):
        if not (self.T > 0 and np.isfinite(self.T)):
            raise ValueError(f"horizon must be positive and finite, got {self.T}")
        if self.n < 2:
            raise ValueError(f"need at least 2 steps, got n={self.n}")

    @property
    def step(self) -> float:
        return self.T / self.n

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n + 1)

    def extended(self, extra_steps: int) -> "TimeGrid":
        """Grid with `extra_steps` more cells appended at the same spacing."""
        if extra_steps < 0:
            raise ValueError("extra_steps must be non-negative")
        if extra_steps == 0:
            return self
        return TimeGrid(self.T + extra_steps * self.step, self.n + extra_steps)

    def index_of(self, t: float, *, rtol: float = 1e-9) -> int:
        """Index of a grid point, rejecting off-grid times."""
        k = int(round(t / self.step))
        if k < 0 or k > self.n or abs(k * self.step - t) > rtol * max(self.step, abs(t)):
            raise ValueError(f"time {t} is not a grid point of step {self.step}")
        return k

    def compatible(self, other: "TimeGrid", *, rtol: float = 1e-9) -> bool:
        return abs(self.step - other.step) <= rtol * self.step


@dataclass(frozen=True)
class SamplePath:
    """Values of an m-dimensional path on a uniform grid.

    ``values[j, i]`` is component j at time ``grid.times()[i]``; every
    component starts at zero.  ``seed``/``replicate_index`` record the stream
    the path was drawn from, ``method`` the sampler, and ``fallback`` whether
    the circulant sampler had to fall back to Cholesky.
    """

    grid: TimeGrid
    m: int
    values: np.ndarray
    H: float
    seed: int
    replicate_index: int
    method: str = "circulant"
    fallback: bool = field(default=False, compare=False)

    def __post_init__(self):
        check_hurst(self.H)
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.m, self.grid.n + 1):
            raise ValueError(
                f"values shape {vals.shape} does not match (m, n+1)="
                f"({self.m}, {self.grid.n + 1})"
            )
        if not np.all(vals[:, 0] == 0.0):
            raise ValueError("paths must start at zero")
        if not np.all(np.isfinite(vals)):
            raise ValueError("path values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def component(self, j: int = 0) -> np.ndarray:
        return self.values[j]


def covariance(s: float, t: float, H: float) -> float:
    """Covariance of one fBm component at times s and t.

    Equals (s^{2H} + t^{2H} - |t-s|^{2H}) / 2; reduces to min(s, t) at
    H = 1/2.
    """
    H = check_hurst(H)
    if s < 0 or t < 0:
        raise ValueError(f"times must be non-negative, got ({s}, {t})")
    g = 2.0 * H
    return 0.5 * (s**g + t**g - abs(t - s) ** g)


def path_rng(seed: int, replicate: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for one (seed, replicate) stream.

    Uses the Philox bit generator keyed through a SeedSequence spawn key, so
    replicate r's stream depends only on (seed, r, stream) and never on how
    many replicates run before it or on which worker.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replicate), int(stream)))
    return np.random.Generator(np.random.Philox(ss))


def _fgn_autocov(n: int, H: float) -> np.ndarray:
    """Autocovariance gamma(0..n-1) of unit-step fractional Gaussian noise."""
    k = np.arange(n, dtype=float)
    g = 2.0 * H
    return 0.5 * (np.abs(k + 1) ** g - 2.0 * np.abs(k) ** g + np.abs(k - 1) ** g)


@lru_cache(maxsize=64)
def _circulant_coeffs(n: int, H: float) -> tuple[np.ndarray, bool]:
    """Square roots of the circulant embedding eigenvalues, plus a PSD flag.

    The flag is False when some eigenvalue was below the -EIG_TOL*max floor,
    in which case the caller must fall back to Cholesky sampling.
    """
    gamma = _fgn_autocov(n, H)
    first_row = np.concatenate([gamma, [0.0], gamma[1:][::-1]])
    eigs = np.fft.fft(first_row).real
    floor = -EIG_TOL * eigs.max()
    if eigs.min() < floor:
        return np.empty(0), False
    coeffs = np.sqrt(np.clip(eigs, 0.0, None))
    coeffs.setflags(write=False)
    return coeffs, True


@lru_cache(maxsize=16)
def _increment_cholesky(n: int, H: float) -> np.ndarray:
    """Lower Cholesky factor of the unit-step fGn covariance (Toeplitz)."""
    gamma = _fgn_autocov(n, H)
    idx = np.arange(n)
    cov = gamma[np.abs(idx[:, None] - idx[None, :])]
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise CholeskyFactorizationError(
            f"increment covariance of size {n}x{n} (H={H}) is numerically "
            f"non-positive-definite"
        ) from exc
    L.setflags(write=False)
    return L


def _fgn_circulant(rng: np.random.Generator, n: int, m: int, coeffs: np.ndarray) -> np.ndarray:
    """m independent unit-step fGn samples of length n via circulant embedding."""
    out = np.empty((m, n))
    for j in range(m):
        z = np.empty(2 * n, dtype=complex)
        z[0] = rng.standard_normal()
        z[n] = rng.standard_normal()
        v = rng.standard_normal((n - 1, 2))
        z[1:n] = (v[:, 0] + 1j * v[:, 1]) / np.sqrt(2.0)
        z[n + 1 :] = np.conj(z[1:n][::-1])
        out[j] = np.sqrt(2 * n) * np.fft.ifft(coeffs * z).real[:n]
    return out


def _fgn_cholesky(rng: np.random.Generator, n: int, m: int, L: np.ndarray) -> np.ndarray:
    z = rng.standard_normal((m, n))
    return z @ L.T


def generate_path(
    grid: TimeGrid,
    H: float,
    m: int = 1,
    seed: int = 0,
    replicate: int = 0,
    method: str | None = None,
) -> SamplePath:
    """Draw one m-dimensional fBm path on `grid`.

    The joint law of the returned values is exactly centered Gaussian with
    covariance ``covariance(t_i, t_j, H)`` per component, components
    independent.  The draw is a pure function of
    (grid, H, m, seed, replicate, method).

    method: "circulant" (Davies-Harte style embedding), "cholesky", or None
    for the default (circulant when n >= 64, else Cholesky).  A non-PSD
    embedding falls back to Cholesky and sets ``fallback`` on the result.
    """
    H = check_hurst(H)
    if m < 1:
        raise ValueError(f"need at least one component, got m={m}")
    if method is None:
        method = "circulant" if grid.n >= 64 else "cholesky"
    if method not in ("circulant", "cholesky"):
        raise ValueError(f"unknown method {method!r}")

    n = grid.n
    rng = path_rng(seed, replicate)
    fallback = False
    if method == "circulant":
        coeffs, ok = _circulant_coeffs(n, H)
        if ok:
            fgn = _fgn_circulant(rng, n, m, coeffs)
        else:
            fallback = True
            warnings.warn(
                f"circulant embedding for n={n}, H={H} is not PSD; "
                f"falling back to Cholesky",
                RuntimeWarning,
                stacklevel=2,
            )
            fgn = _fgn_cholesky(rng, n, m, _increment_cholesky(n, H))
    else:
        fgn = _fgn_cholesky(rng, n, m, _increment_cholesky(n, H))

    fgn *= grid.step**H
    values = np.concatenate([np.zeros((m, 1)), np.cumsum(fgn, axis=1)], axis=1)
    return SamplePath(
        grid=grid,
        m=m,
        values=values,
        H=H,
        seed=int(seed),
        replicate_index=int(replicate),
        method=method,
        fallback=fallback,
    )


def empirical_covariance(
    paths: list[SamplePath] | tuple[SamplePath, ...],
    i: int,
    j: int,
    component: int = 0,
) -> tuple[float, float]:
    """Sample mean of w(t_i) w(t_j) over paths, with its plug-in standard error.

    All paths must share grid, H and dimension.  Returns (estimate, stderr);
    the standard error is the sample standard deviation of the products
    divided by sqrt(#paths).
    """
    if len(paths) == 0:
        raise ValueError("empty path collection")
    ref = paths[0]
    for p in paths[1:]:
        if p.grid != ref.grid or p.H != ref.H or p.m != ref.m:
            raise ValueError("paths must share grid, H and dimension")
    prods = np.array([p.values[component, i] * p.values[component, j] for p in paths])
    est = float(prods.mean())
    if len(paths) == 1:
        return est, 0.0
    se = float(prods.std(ddof=1) / np.sqrt(len(prods)))
    return est, se
