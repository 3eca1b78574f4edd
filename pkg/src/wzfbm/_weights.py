"""Cached lag-weight vectors shared by the norm and derivative kernels.

Everything on a uniform grid reduces to dot products against vectors indexed
by the lag d = j - l; these are cached per (n, step, exponent) because the
rate harness evaluates thousands of paths on the same grid.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["lag_powers", "marchaud_l1_weights"]


@lru_cache(maxsize=64)
def lag_powers(n: int, step: float, exponent: float) -> np.ndarray:
    """(d*step)^(-exponent) for lags d = 1..n."""
    lags = np.arange(1, n + 1, dtype=float) * step
    out = lags**-exponent
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def marchaud_l1_weights(n: int, step: float, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Product-integration weights for the singular Marchaud tail.

    For T_j = int_0^{j*step} phi(v) v^(-alpha-1) dv with phi piecewise linear
    on the lag grid and phi(0) = 0, writing phi_m = phi(m*step):

        T_j = sum_{m=1}^{j} phi_m * w[m-1]  +  phi_j * (b[j-1] - w[j-1]),

    where w are the interior weights and b[m-1] the weight of the hat
    function ending at lag m when that lag is the last one.  The rule is
    exact for phi linear in v, so lag-power inputs of order one are
    differentiated exactly.
    """
    m = np.arange(1, n + 1, dtype=float)
    ih = step**-alpha
    # I0(m) = int over cell m of v^(-alpha-1) dv (times alpha), I1(m) the
    # rising-hat moment; the m = 1 cell is singular and only I1 survives.
    i0 = np.empty(n)
    i1 = np.empty(n)
    i1[0] = ih / (1.0 - alpha)
    i0[0] = np.inf
    if n > 1:
        mm = m[1:]
        i0[1:] = ih * ((mm - 1.0) ** -alpha - mm**-alpha) / alpha
        i1[1:] = ih * (
            (mm ** (1.0 - alpha) - (mm - 1.0) ** (1.0 - alpha)) / (1.0 - alpha)
            - (mm - 1.0) * ((mm - 1.0) ** -alpha - mm**-alpha) / alpha
        )
    w = i1.copy()
    w[:-1] += i0[1:] - i1[1:]
    w.setflags(write=False)
    i1.setflags(write=False)
    return w, i1
