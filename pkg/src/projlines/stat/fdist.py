"""F distribution with ``(d, r)`` degrees of freedom."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import special


def _check_dof(d, r):
    if not (d > 0 and r > 0):
        raise ValueError(f"invalid degrees of freedom ({d}, {r})")


def f_cdf(d, r, x):
    """``P(F_{d,r} <= x)``, i.e. the regularized incomplete beta ``I_{dx/(dx+r)}(d/2, r/2)``.

    Vectorized over ``x``; negative ``x`` is rejected, ``x = inf`` gives 1.
    """
    _check_dof(d, r)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be non-negative")
    out = np.where(np.isinf(x), 1.0, special.fdtr(d, r, np.where(np.isinf(x), 0.0, x)))
    return float(out) if out.ndim == 0 else out


def f_logpdf(d, r, x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return (0.5 * d * np.log(d / r) + (0.5 * d - 1.0) * np.log(x)
                - 0.5 * (d + r) * np.log1p(d * x / r) - special.betaln(0.5 * d, 0.5 * r))


def f_pdf(d, r, x):
    _check_dof(d, r)
    out = np.exp(f_logpdf(d, r, x))
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=256)
def f_quantile(d, r, p) -> float:
    """``x`` with ``f_cdf(d, r, x) = p``, by bisection."""
    _check_dof(d, r)
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    lo, hi = 0.0, 1.0
    while f_cdf(d, r, hi) < p:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise ArithmeticError("quantile bracket overflow")
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f_cdf(d, r, mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
