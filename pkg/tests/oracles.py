"""Independent reference implementations used to validate the package.

Everything here is deliberately written the slow, obvious way (loops,
bisection, direct formulas) with no code shared with the implementations
under test.
"""

import math

import numpy as np


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def bisection_normal_ppf(p: float, lo: float = -13.0, hi: float = 13.0,
                         iters: int = 200) -> float:
    """Solve normal_cdf(x) >= p by bisection; accurate far below 1e-10."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) >= p:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def interp_quantile(sorted_values: np.ndarray, p: float) -> float:
    """Linear-interpolated empirical quantile of pre-sorted data."""
    n = len(sorted_values)
    h = p * (n - 1)
    lo = int(math.floor(h))
    if lo >= n - 1:
        return float(sorted_values[-1])
    frac = h - lo
    return float(sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]))


def empirical_cdf_prob(sorted_values: np.ndarray, x: float) -> float:
    """Midpoint-rank empirical CDF of pre-sorted data, in [0, 1]."""
    n = len(sorted_values)
    below = int(np.searchsorted(sorted_values, x, side="left"))
    tied = int(np.searchsorted(sorted_values, x, side="right")) - below
    if tied > 0:
        # mean rank of the tied block, scaled onto [0, 1]
        ranks = [(below + j) / (n - 1) for j in range(tied)]
        return float(np.mean(ranks))
    if below == 0:
        return 0.0
    if below == n:
        return 1.0
    x0, x1 = sorted_values[below - 1], sorted_values[below]
    t = (x - x0) / (x1 - x0)
    return ((below - 1) + t) / (n - 1)
