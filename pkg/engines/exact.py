"""
Exact random access expectations.

The general engine counts, for every subset size s, the column subsets whose span
contains e_i and turns those counts into E[tau_i] with rational arithmetic. Closed
forms cover the weight-2 families G_3(x, y), G_4(x, y) and the complete k=2 theory.
"""

import logging
import math
from fractions import Fraction
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from engines.codes import (
    GeneratorMatrix,
    TwoDimProfile,
    echelon_basis,
    projective_classes,
)
from utils.calculations import binom, harmonic_number
from utils.errors import GuardError, InputError
from utils.gf import split_prime_power
from utils.settings import get_settings

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2)

Method = Literal[
    "bruteforce", "closed_form_k2", "closed_form_k3", "closed_form_k4", "monte_carlo", "asymptotic_bound"
]


class AlphaProfile(BaseModel):
    """Counts alpha^s of s-subsets of the n columns whose span contains e_i, for s = 1..n-1."""

    model_config = ConfigDict(frozen=True)

    i: int
    n: int
    alpha: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_counts(self):
        if self.n < 1 or len(self.alpha) != self.n - 1:
            raise ValueError(f"expected {self.n - 1} counts for n = {self.n}")
        for s, count in enumerate(self.alpha, start=1):
            if not 0 <= count <= binom(self.n, s):
                raise ValueError(f"alpha^{s} = {count} outside [0, C({self.n},{s})]")
        return self

    @property
    def harmonic_n(self) -> Fraction:
        return harmonic_number(self.n)

    def rows(self):
        """(s, alpha^s, C(n-1, s)) triples."""
        return [(s, a, binom(self.n - 1, s)) for s, a in enumerate(self.alpha, start=1)]


class ExpectationReport(BaseModel):
    """Per-strand expectations with their maximum; exact rationals are kept when known."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    per_strand: List[float]
    t_max: float
    method: Method
    stderr: List[float]
    exact: Optional[List[Fraction]] = None
    trials: int = 0

    @model_validator(mode="after")
    def _check_report(self):
        if not self.per_strand:
            raise ValueError("report needs at least one strand")
        if self.t_max != max(self.per_strand):
            raise ValueError("t_max must be the largest per-strand expectation")
        if len(self.stderr) != len(self.per_strand):
            raise ValueError("one standard error per strand is required")
        return self

    @classmethod
    def build(cls, per_strand, method, stderr=None, exact=None, trials=0):
        per_strand = [float(v) for v in per_strand]
        return cls(
            per_strand=per_strand,
            t_max=max(per_strand),
            method=method,
            stderr=list(stderr) if stderr is not None else [0.0] * len(per_strand),
            exact=list(exact) if exact is not None else None,
            trials=trials,
        )

    @property
    def exact_t_max(self):
        if self.exact is None:
            return None
        return max(self.exact)


def _binomial_row(m):
    return np.array([binom(m, t) for t in range(m + 1)], dtype=np.int64)


def alpha_bruteforce(G: GeneratorMatrix, i: int) -> AlphaProfile:
    """
    Count recovering column subsets of every size by depth-first enumeration.

    Columns are first merged into collinearity classes; the walk decides which
    classes are used and a generating polynomial tracks how many column subsets
    realize each choice. A branch whose span already holds e_i adds all of its
    supersets at once.

    Args:
        G (GeneratorMatrix): Full-rank matrix with n within the enumeration guard
        i (int): Strand index, 1..k

    Returns:
        AlphaProfile: Exact counts for s = 1..n-1
    """
    if not 1 <= i <= G.k:
        raise InputError(f"strand index {i} outside 1..{G.k}")
    n = G.n
    guard = get_settings().max_enum_columns
    if n > guard:
        raise GuardError(f"n = {n} columns exceeds the enumeration guard {guard}")

    classes = projective_classes(G)
    full_rows = [_binomial_row(m) for _, m in classes]
    used_rows = []
    for row in full_rows:
        used = row.copy()
        used[0] = 0
        used_rows.append(used)
    # Columns in classes idx.. onwards
    remaining = [0] * (len(classes) + 1)
    for idx in range(len(classes) - 1, -1, -1):
        remaining[idx] = remaining[idx + 1] + classes[idx][1]

    target = i - 1
    totals = np.zeros(n + 1, dtype=np.int64)

    def walk(idx, basis, poly):
        if basis.contains_unit(target):
            contribution = np.convolve(poly, _binomial_row(remaining[idx]))
            totals[: len(contribution)] += contribution
            return
        if idx == len(classes):
            return
        extended = basis.copy()
        if extended.insert(classes[idx][0]):
            walk(idx + 1, basis, poly)
            walk(idx + 1, extended, np.convolve(poly, used_rows[idx]))
        else:
            walk(idx + 1, basis, np.convolve(poly, full_rows[idx]))

    walk(0, echelon_basis(G.field, G.k), np.ones(1, dtype=np.int64))
    logger.debug("alpha enumeration over %d classes for strand %d done", len(classes), i)
    return AlphaProfile(i=i, n=n, alpha=tuple(int(v) for v in totals[1:n]))


def expectation_from_alpha(ap: AlphaProfile) -> Fraction:
    """E[tau_i] = n H_n - sum_s alpha^s / C(n-1, s), exactly."""
    total = ap.n * ap.harmonic_n
    for s, count, denominator in ap.rows():
        total -= Fraction(count, denominator)
    return total


def exact_expectation(G: GeneratorMatrix) -> ExpectationReport:
    values = [expectation_from_alpha(alpha_bruteforce(G, i)) for i in range(1, G.k + 1)]
    return ExpectationReport.build(values, "bruteforce", exact=values)


def _check_multiplicities(x, y):
    if x < 1 or y < 1:
        raise InputError(f"x and y must be positive, got x={x}, y={y}")


def _non_recovering_k3(x, y, s):
    """Size-s column subsets of G_3(x, y) whose component at vertex 1 has no cycle."""
    return binom(x + 2 * y, s) + 2 * x * binom(y, s - 1) + (3 * x * x if s == 2 else 0)


def _non_recovering_k4(x, y, s):
    """Size-s column subsets of G_4(x, y) whose component at vertex 1 has no cycle."""
    return (
        binom(3 * x + 3 * y, s)
        + 3 * x * binom(x + 2 * y, s - 1)
        + 9 * x * x * binom(y, s - 2)
        + (16 * x ** 3 if s == 3 else 0)
    )


def alpha_closed_form_k3(x: int, y: int, s: int) -> int:
    _check_multiplicities(x, y)
    n = 3 * x + 3 * y
    if not 1 <= s <= n - 1:
        raise InputError(f"s = {s} outside 1..{n - 1}")
    return binom(n, s) - _non_recovering_k3(x, y, s)


def alpha_tree_count_k4(x: int, y: int, s: int) -> int:
    """alpha^s of G_4(x, y) as all s-subsets minus those leaving vertex 1 in a tree."""
    _check_multiplicities(x, y)
    n = 6 * x + 4 * y
    if not 1 <= s <= n - 1:
        raise InputError(f"s = {s} outside 1..{n - 1}")
    return binom(n, s) - _non_recovering_k4(x, y, s)


def alpha_closed_form_k4(x: int, y: int, s: int) -> int:
    """
    alpha^s of G_4(x, y), the same for every strand, by subset size.

    Args:
        x (int): Columns per edge block
        y (int): Copies of each weight-1 column
        s (int): Subset size, 1 <= s <= 6x+4y-1

    Returns:
        int: Number of recovering s-subsets
    """
    _check_multiplicities(x, y)
    n = 6 * x + 4 * y
    if not 1 <= s <= n - 1:
        raise InputError(f"s = {s} outside 1..{n - 1}")
    if s == 1:
        return y
    if s == 2:
        return 3 * (binom(x, 2) + x * y) + binom(y, 2) + y * (6 * x + 3 * y)
    if s == 3:
        return (
            3 * (binom(3 * x + 2 * y, 3) - binom(x + 2 * y, 3) - 2 * x * binom(y, 2))
            - 3 * (binom(x, 3) + binom(x, 2) * y + x * binom(y, 2))
            + 3 * x * (x * y + binom(x, 2))
            + y * binom(6 * x + 3 * y, 2)
            + binom(y, 2) * (6 * x + 3 * y)
            + binom(y, 3)
        )
    if s <= 3 * x + 3 * y:
        # One x^2 term covers both two-edge tree shapes through vertex 1 (3x^2 + 6x^2)
        return (
            binom(n, s)
            - binom(3 * x + 3 * y, s)
            - 3 * x * binom(x + 2 * y, s - 1)
            - 9 * x * x * binom(y, s - 2)
        )
    return binom(n, s)


def alpha_profile_closed_form(k: int, x: int, y: int) -> AlphaProfile:
    if k == 3:
        n = 3 * x + 3 * y
        alpha = [alpha_closed_form_k3(x, y, s) for s in range(1, n)]
    elif k == 4:
        n = 6 * x + 4 * y
        alpha = [alpha_closed_form_k4(x, y, s) for s in range(1, n)]
    else:
        raise InputError(f"closed forms exist for k = 3 and k = 4, not k = {k}")
    return AlphaProfile(i=1, n=n, alpha=tuple(alpha))


def closed_form_expectation(k: int, x: int, y: int) -> float:
    """
    E[tau_i] of G_k(x, y) for k in {3, 4} as 1 + sum_s beta^s / C(n-1, s).

    beta^s counts the non-recovering s-subsets. Binomials are updated incrementally as
    big integers and each ratio is a correctly rounded integer division, so n in the
    tens of thousands stays fast and accurate.
    """
    _check_multiplicities(x, y)
    if k == 3:
        n, tail = 3 * x + 3 * y, x + 2 * y
    elif k == 4:
        n, tail = 6 * x + 4 * y, 3 * x + 3 * y
    else:
        raise InputError(f"closed forms exist for k = 3 and k = 4, not k = {k}")
    logger.debug("closed-form expectation for k=%d x=%d y=%d (n=%d)", k, x, y, n)
    # Rolling binomial rows C(N, s) for the four populations that appear
    denom = 1  # C(n-1, s)
    if k == 3:
        big, mid = x + 2 * y, y
        c_big, c_mid_prev = 1, 1  # C(big, s), C(mid, s-1)
    else:
        big, mid, small = 3 * x + 3 * y, x + 2 * y, y
        c_big, c_mid_prev, c_small_prev2 = 1, 1, 0  # C(big, s), C(mid, s-1), C(small, s-2)

    terms = []
    for s in range(1, tail + 1):
        denom = denom * (n - s) // s
        c_big = c_big * (big - s + 1) // s
        if k == 3:
            if s >= 2:
                c_mid_prev = c_mid_prev * (mid - s + 2) // (s - 1)
            beta = c_big + 2 * x * c_mid_prev + (3 * x * x if s == 2 else 0)
        else:
            if s >= 2:
                c_mid_prev = c_mid_prev * (mid - s + 2) // (s - 1)
            if s == 2:
                c_small_prev2 = 1
            elif s > 2:
                c_small_prev2 = c_small_prev2 * (small - s + 3) // (s - 2)
            beta = (
                c_big
                + 3 * x * c_mid_prev
                + 9 * x * x * c_small_prev2
                + (16 * x ** 3 if s == 3 else 0)
            )
        terms.append(beta / denom)
    return 1.0 + math.fsum(terms)


def k2_expectation(profile: TwoDimProfile) -> Tuple[Fraction, Fraction]:
    """
    (E[tau_1], E[tau_2]) of a k=2 matrix from its class counts.

    Args:
        profile (TwoDimProfile): Column counts per collinearity class

    Returns:
        tuple: Exact expectations for both strands
    """
    x = profile.x
    if x - profile.x1 <= 0 or x - profile.x2 <= 0 or any(x - a <= 0 for a in profile.a):
        raise InputError("profile has rank below 2: every column lies in one class")
    slope_terms = sum((Fraction(a, x - a) for a in profile.a if a), Fraction(0))
    e1 = 1 + Fraction(profile.x2, x - profile.x2) + slope_terms
    e2 = 1 + Fraction(profile.x1, x - profile.x1) + slope_terms
    return e1, e2


def k2_report(profile: TwoDimProfile) -> ExpectationReport:
    values = list(k2_expectation(profile))
    return ExpectationReport.build(values, "closed_form_k2", exact=values)


def _check_prime_power(q):
    split_prime_power(q)


def tq2_value(q: int) -> float:
    """Optimal worst-strand expectation over k=2 codes on GF(q) as n grows."""
    _check_prime_power(q)
    numerator = 2 * q * q - q * (SQRT2 + 1) - 2 + SQRT2
    denominator = q * q * (1 + SQRT2) - q * (2 + SQRT2)
    return 1 + numerator / denominator


def tq2_optimal_a(q: int, x1: float) -> float:
    """Real-valued optimal slope-class multiplicity when x1 = x2 and all a_i are equal."""
    if q < 2:
        raise InputError(f"field order {q} must be at least 2")
    return (SQRT2 * q - 2) / (q * q - 2) * x1


def tq2_profile_value(q: int, x1: float, a: float) -> float:
    """Worst-strand expectation of the balanced profile x1 = x2, a_i = a for all q-1 classes."""
    return 1 + x1 / (x1 + (q - 1) * a) + (q - 1) * a / (2 * x1 + (q - 2) * a)


def tq2_limit() -> float:
    return 1 + 2 / (SQRT2 + 1)
