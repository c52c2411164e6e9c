"""
Numeric helpers for random access calculations.
Provides harmonic numbers, guarded binomials, the coupon-collector lower bounds,
one-dimensional minimizers and exact running moments for Monte Carlo merges.
"""

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


def binom(n, s):
    """
    Binomial coefficient that is zero outside 0 <= s <= n.

    Args:
        n (int): Population size (may be negative, giving zero)
        s (int): Subset size

    Returns:
        int: C(n, s)
    """
    if s < 0 or n < 0 or s > n:
        return 0
    return math.comb(n, s)


@lru_cache(maxsize=256)
def harmonic_number(n):
    """
    Exact n-th harmonic number H_n = 1 + 1/2 + ... + 1/n.

    Args:
        n (int): Index, n >= 0 (H_0 = 0)

    Returns:
        Fraction: H_n
    """
    if n < 0:
        raise ValueError("harmonic number index must be non-negative")
    if n == 0:
        return Fraction(0)
    # Sum over the common denominator lcm(1..n), reduce once
    common = math.lcm(*range(1, n + 1))
    return Fraction(sum(common // j for j in range(1, n + 1)), common)


def lower_bounds(n, k):
    """
    The two known lower bounds on the worst-strand expectation of any rank-k code of length n.

    Args:
        n (int): Number of encoded strands
        k (int): Number of information strands

    Returns:
        dict: "half_k" = (k+1)/2 and "coupon" = n - n(n-k)/k * (H_n - H_{n-k}), both exact
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    # Equals k at n = k and tends to (k+1)/2 as n grows
    coupon = n - Fraction(n * (n - k), k) * (harmonic_number(n) - harmonic_number(n - k))
    return {
        "half_k": Fraction(k + 1, 2),
        "coupon": coupon,
    }


def golden_section_search(f, a, b, tol=1e-6):
    """
    Golden-section search for the minimum of a unimodal function on [a, b].

    Args:
        f (callable): Objective, real -> real
        a (float): Left end of the bracket
        b (float): Right end of the bracket
        tol (float): Final bracket width

    Returns:
        tuple: (argmin, min value)
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = (a + b) / 2
        return x, f(x)

    # Required steps to achieve tolerance
    steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    for _ in range(steps - 1):
        if yc < yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    if yc < yd:
        lo, hi = a, d
    else:
        lo, hi = c, b
    x = (lo + hi) / 2
    return x, f(x)


def grid_then_golden(f, lo, hi, points=101, log_spaced=False, tol=1e-6):
    """
    Locate the basin of f with a coarse grid, then refine it by golden-section search.

    Args:
        f (callable): Objective, real -> real; must return finite values
        lo (float): Lower end of the search interval
        hi (float): Upper end of the search interval
        points (int): Number of grid points
        log_spaced (bool): Use a logarithmic grid (requires lo > 0)
        tol (float): Final bracket width

    Returns:
        tuple: (argmin, min value)
    """
    if log_spaced:
        grid = np.geomspace(lo, hi, points)
    else:
        grid = np.linspace(lo, hi, points)
    values = []
    for x in grid:
        value = f(float(x))
        if not math.isfinite(value):
            raise ValueError(f"objective is not finite at {float(x)!r}")
        values.append(value)

    # Ties go to the smaller parameter
    best = int(np.argmin(values))
    left = float(grid[max(best - 1, 0)])
    right = float(grid[min(best + 1, len(grid) - 1)])
    x, value = golden_section_search(f, left, right, tol=tol)
    if values[best] < value:
        return float(grid[best]), values[best]
    return x, value


class RunningMoments:
    """Exact count / sum / sum-of-squares accumulator for integer stopping times."""

    def __init__(self, count=0, total=0, total_sq=0):
        self.count = count
        self.total = total
        self.total_sq = total_sq

    def add(self, value):
        self.count += 1
        self.total += value
        self.total_sq += value * value

    def merge(self, other):
        return RunningMoments(
            self.count + other.count,
            self.total + other.total,
            self.total_sq + other.total_sq,
        )

    @property
    def mean(self):
        if self.count == 0:
            return float("nan")
        return self.total / self.count

    @property
    def stderr(self):
        """Sample standard deviation over sqrt(count)."""
        if self.count < 2:
            return 0.0
        # Integer arithmetic keeps the variance exact before the final division
        numerator = self.count * self.total_sq - self.total * self.total
        variance = numerator / (self.count * (self.count - 1))
        return math.sqrt(max(variance, 0.0) / self.count)
