"""
Asymptotic expectations and bounds for the complete-graph collection model.

A draw is an edge of K_k with probability p each or a vertex with probability P each.
The upper bound on E[tau_1] splits the non-recovery events into "no component has
touched vertex 1" and "vertex 1 sits in a tree"; its p = P specialization has a closed
form in k. The k = 3 family also has an exact limit formula and a looser closed bound.
"""

import logging
import math
from fractions import Fraction
from typing import Callable, Dict, Tuple

from pydantic import BaseModel, ConfigDict

from engines.exact import closed_form_expectation
from engines.sim import GraphModelParams
from utils.calculations import grid_then_golden
from utils.errors import InputError

logger = logging.getLogger(__name__)

CONSTRAINT_TOLERANCE = 1e-9
ALPHA_BRACKET = (1e-3, 10.0)
PI_SQUARED_OVER_12 = math.pi ** 2 / 12


class AsymptoticBound(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    p: float
    P: float
    case_i: float
    case_ii: float
    total: float
    v: float
    u_by_ell: Dict[int, float]

    @property
    def normalized(self):
        return self.total / self.k


def _v(k, p, P):
    return math.comb(k - 2, 2) * p + (k - 2) * P


def _u(k, ell, p, P):
    if ell >= k - 1:
        return 0.0
    rest = k - ell - 1
    return math.comb(rest, 2) * p + rest * P


def case_i(k: int, p: float, P: float) -> float:
    """Contribution of rounds in which no drawn item touches vertex 1."""
    touch = (k - 1) * p + P
    if touch <= 0:
        raise InputError("(k-1)p + P must be positive")
    return (1 - touch) ** 2 / touch


def case_ii(k: int, p: float, P: float) -> float:
    """
    Contribution of rounds in which vertex 1 lies in a tree component.

    Args:
        k (int): Number of vertices
        p (float): Probability of each edge
        P (float): Probability of each vertex

    Returns:
        float: The single-edge term plus one term per tree size ell = 2..k-1
    """
    v = _v(k, p, P)
    if v >= 1:
        raise InputError(f"v = {v} >= 1: geometric series diverges")
    if p == 0:
        return 0.0
    terms = [(k - 1) * p * v * (2 - v) / (1 - v) ** 2]
    log_p = math.log(p)
    for ell in range(2, k):
        u = _u(k, ell, p, P)
        if u >= 1:
            raise InputError(f"u({ell}) = {u} >= 1: geometric series diverges")
        # C(k-1, ell) * ell! = (k-1)! / (k-1-ell)!
        log_term = (
            math.lgamma(k)
            - math.lgamma(k - ell)
            + (ell - 1) * math.log(ell + 1)
            + ell * log_p
            - (ell + 1) * math.log1p(-u)
        )
        terms.append(math.exp(log_term))
    return math.fsum(terms)


def tk_bound(k: int, p: float, P: float) -> AsymptoticBound:
    """Upper bound 1 + (1 - P) + case_i + case_ii on E[tau_1] for a point on kP + C(k,2)p = 1."""
    if k < 2:
        raise InputError(f"k = {k} must be at least 2")
    if p < 0 or P < 0:
        raise InputError("probabilities must be non-negative")
    constraint = k * P + math.comb(k, 2) * p
    if abs(constraint - 1) > CONSTRAINT_TOLERANCE:
        raise InputError(f"kP + C(k,2)p = {constraint!r}, expected 1")

    first = case_i(k, p, P)
    second = case_ii(k, p, P)
    return AsymptoticBound(
        k=k,
        p=p,
        P=P,
        case_i=first,
        case_ii=second,
        total=1 + (1 - P) + first + second,
        v=_v(k, p, P),
        u_by_ell={ell: _u(k, ell, p, P) for ell in range(2, k)},
    )


def ratio_to_pP(k: int, alpha: float) -> Tuple[float, float]:
    params = GraphModelParams.from_ratio(k, alpha)
    return params.p, params.P


def ratio_bound(k: int, alpha: float) -> AsymptoticBound:
    return tk_bound(k, *ratio_to_pP(k, alpha))


def ubfin_bound(k: int) -> float:
    """
    The bound at p = P = 2/(k^2 + k) in closed form.

    Every rational piece is evaluated exactly and the tree sum uses correctly rounded
    big-integer ratios.
    """
    if k < 2:
        raise InputError(f"k = {k} must be at least 2")
    kk = k * k + k
    head = 2 - Fraction(2, kk) + Fraction((k - 1) ** 2, 2 * (k + 1))
    head += (
        Fraction(2 * (k - 1), kk)
        * Fraction(k * k - 3 * k + 2, 4 * k - 2)
        * Fraction(k * k + 5 * k - 2, 4 * k - 2)
    )
    terms = [float(head)]
    falling = 1  # C(k-1, ell) * ell!
    for ell in range(1, k):
        falling *= k - ell
        if ell < 2:
            continue
        numerator = falling * 2 ** ell * kk
        denominator = (ell + 1) ** 2 * (2 * k - ell) ** (ell + 1)
        terms.append(numerator / denominator)
    return math.fsum(terms)


def ubfin_limit() -> float:
    """Limit of ubfin_bound(k) / k."""
    return PI_SQUARED_OVER_12


def k3_exact(alpha: float) -> float:
    """Limit of T_max(G_3(x, alpha x)) as x grows."""
    if alpha < 0:
        raise InputError(f"ratio {alpha} must be non-negative")
    a = alpha
    numerator = 153 + 543 * a + 805 * a ** 2 + 611 * a ** 3 + 234 * a ** 4 + 36 * a ** 5
    denominator = 3 * (1 + a) ** 2 * (2 + a) * (3 + 2 * a) ** 2
    return numerator / denominator


def k3_upper_appendix(alpha: float) -> float:
    if alpha <= 0:
        raise InputError(f"ratio {alpha} must be positive")
    a = alpha
    return (
        3
        - a / (3 + 3 * a)
        - (2 + 10 * a + 5 * a ** 2) / (9 * (1 + a) ** 2)
        + (1 + 2 * a) ** 3 / (9 * (1 + a) ** 2 * (2 + a))
        + 2 * a ** 2 * (9 + 7 * a) / (9 * (1 + a) ** 2 * (3 + 2 * a) ** 2)
    )


def k3_finite(x: int, y: int) -> float:
    """Exact T_max(G_3(x, y)) at finite size."""
    return closed_form_expectation(3, x, y)


def optimize_alpha(k: int, evaluator: Callable[[float], float], bracket=ALPHA_BRACKET) -> Tuple[float, float]:
    """
    Minimize an objective of the vertex-to-edge ratio.

    Args:
        k (int): Number of strands, used for logging
        evaluator (callable): alpha -> expectation, unimodal on the bracket
        bracket (tuple): Search interval, log-spaced grid

    Returns:
        tuple: (alpha*, value)
    """
    lo, hi = bracket
    try:
        alpha, value = grid_then_golden(evaluator, lo, hi, points=101, log_spaced=True, tol=1e-6)
    except ValueError as e:
        raise InputError(str(e)) from e
    logger.info("k=%d: optimal ratio %.6f with value %.9f", k, alpha, value)
    return alpha, value


def objective_for(k: int, name: str) -> Callable[[float], float]:
    """Named ratio objectives: exact3, appendix3 (k = 3 only) and graph."""
    if name == "graph":
        return lambda alpha: ratio_bound(k, alpha).total
    if name in ("exact3", "appendix3"):
        if k != 3:
            raise InputError(f"objective {name} is defined for k = 3 only")
        return k3_exact if name == "exact3" else k3_upper_appendix
    raise InputError(f"unknown objective {name!r}")


def optimize_pP(k: int) -> Tuple[float, float, float]:
    """Minimize the bound along kP + C(k,2)p = 1 over P in [0, 1/k]."""
    if k < 2:
        raise InputError(f"k = {k} must be at least 2")
    edges = math.comb(k, 2)

    def bound_at(P):
        P = min(max(P, 0.0), 1 / k)
        return tk_bound(k, max((1 - k * P) / edges, 0.0), P).total

    P, value = grid_then_golden(bound_at, 0.0, 1 / k, points=101, tol=1e-8)
    P = min(max(P, 0.0), 1 / k)
    p = max((1 - k * P) / edges, 0.0)
    logger.info("k=%d: optimal p=%.9f P=%.9f value %.9f", k, p, P, value)
    return p, P, value
