"""
Recovery-complete weight-2 generator matrices.

Exponent sets over Z_{q-1} are found by a greedy scan (sum-free sets, B_{k-1} sets) and
re-checked by independent exhaustive checkers. Matrices place y copies of the identity
next to one block of x weight-2 columns e_i + beta^e e_j per edge (i, j) of K_k.
"""

import itertools
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from engines.codes import GeneratorMatrix, canonical_representative, echelon_basis, unit_vector
from utils.errors import ConstructionError, GuardError, InputError
from utils.gf import FieldSpec, build_field, split_prime_power
from utils.settings import get_settings

logger = logging.getLogger(__name__)

MAX_VERIFY_K = 8
MAX_VERIFY_CHECKS = 1_000_000


class ExponentSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    modulus: int
    elements: Tuple[int, ...]
    strength: int

    @model_validator(mode="after")
    def _check_elements(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        if any(b <= a for a, b in zip(self.elements, self.elements[1:])):
            raise ValueError("elements must be strictly increasing")
        if self.elements and not (0 <= self.elements[0] and self.elements[-1] < self.modulus):
            raise ValueError(f"elements must lie in [0, {self.modulus - 1}]")
        return self

    def __len__(self):
        return len(self.elements)


def bk_violation(elements: Sequence[int], modulus: int, strength: int) -> Optional[Tuple[Tuple[int, int], ...]]:
    """
    Exhaustively look for a vanishing mixed-sign combination of distinct elements.

    Args:
        elements (list): Candidate exponents
        modulus (int): q - 1
        strength (int): Largest combination size checked

    Returns:
        tuple: ((sign, element), ...) of a violation, or None
    """
    elements = sorted(set(e % modulus for e in elements))
    for size in range(2, min(strength, len(elements)) + 1):
        for combo in itertools.combinations(elements, size):
            # The first sign is fixed to +; negating a pattern gives the same condition
            for tail in itertools.product((1, -1), repeat=size - 1):
                if -1 not in tail:
                    continue
                signs = (1,) + tail
                if sum(s * e for s, e in zip(signs, combo)) % modulus == 0:
                    return tuple(zip(signs, combo))
    return None


def satisfies_bk(elements: Sequence[int], modulus: int, strength: int) -> bool:
    return bk_violation(elements, modulus, strength) is None


def is_sum_free(elements: Sequence[int], modulus: int) -> bool:
    """No r + l = s (mod modulus) with r, l, s in the set, r = l allowed."""
    members = set(e % modulus for e in elements)
    return not any((r + l) % modulus in members for r in members for l in members)


def sum_free_set(n: int, size: int) -> ExponentSet:
    """
    Middle-third sum-free subset of Z_n, truncated to the requested size.

    Args:
        n (int): Odd modulus
        size (int): Number of elements wanted

    Returns:
        ExponentSet: Sorted elements with strength 3
    """
    if n < 1 or n % 2 == 0:
        raise InputError(f"modulus {n} must be odd")
    middle = [t for t in range(n) if n < 3 * t <= 2 * n]
    if size < 0 or size > len(middle):
        raise ConstructionError(f"no middle-third sum-free set of size {size} modulo {n}")
    elements = middle[:size]
    if not is_sum_free(elements, n):
        raise ConstructionError(f"middle third of Z_{n} failed the sum-free check")
    return ExponentSet(modulus=n, elements=tuple(elements), strength=3)


def _require_binary_order(q):
    p, _ = split_prime_power(q)
    if p != 2:
        raise InputError(f"exponent search needs a characteristic-2 field, got q = {q}")


def bk_set_search(k: int, q: int, size: int) -> ExponentSet:
    """
    Greedy B_{k-1} set in Z_{q-1}: scan 0, 1, 2, ... and keep every candidate that
    creates no vanishing mixed-sign combination of at most k distinct elements.

    For each t < k two bitsets record the signed sums of t chosen elements, split by
    whether some sign is +. A candidate c entering with sign - closes a violation
    exactly when c is such a sum with a + sign.
    """
    if k < 2:
        raise InputError(f"strength k = {k} must be at least 2")
    _require_binary_order(q)
    if size < 0:
        raise InputError(f"size {size} must be non-negative")
    if size == 0:
        return ExponentSet(modulus=q - 1, elements=(), strength=k)

    modulus = q - 1
    with_plus = [np.zeros(modulus, dtype=bool) for _ in range(k)]
    minus_only = [np.zeros(modulus, dtype=bool) for _ in range(k)]
    minus_only[0][0] = True

    chosen = []
    for candidate in range(modulus):
        if any(with_plus[t][candidate] for t in range(1, k)):
            continue
        chosen.append(candidate)
        if len(chosen) == size:
            break
        for t in range(k - 2, -1, -1):
            any_sum = with_plus[t] | minus_only[t]
            with_plus[t + 1] |= np.roll(any_sum, candidate) | np.roll(with_plus[t], -candidate)
            minus_only[t + 1] |= np.roll(minus_only[t], -candidate)

    if len(chosen) < size:
        raise ConstructionError(
            f"B_{k - 1} search modulo {modulus} stopped at {len(chosen)} of {size} elements; raise q"
        )
    logger.debug("B_%d set of size %d modulo %d: %s", k - 1, size, modulus, chosen)
    return ExponentSet(modulus=modulus, elements=tuple(chosen), strength=k)


class ConstructionParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    x: int
    y: int
    field: FieldSpec
    exponents: ExponentSet

    @model_validator(mode="after")
    def _check_params(self):
        if self.k < 2 or self.x < 0 or self.y < 1:
            raise ValueError(f"need k >= 2, x >= 0, y >= 1; got k={self.k}, x={self.x}, y={self.y}")
        if self.k >= 3 and self.field.p != 2:
            raise ValueError("k >= 3 constructions need a characteristic-2 field")
        if self.exponents.modulus != self.field.order:
            raise ValueError("exponent modulus must be q - 1")
        if len(self.exponents) < self.x * math.comb(self.k, 2):
            raise ValueError(f"need {self.x * math.comb(self.k, 2)} exponents, have {len(self.exponents)}")
        return self

    @property
    def n(self):
        return self.k * self.y + math.comb(self.k, 2) * self.x

    def sidecar(self):
        """JSON-ready description stored next to a written matrix."""
        return {
            "k": self.k,
            "x": self.x,
            "y": self.y,
            "q": self.field.q,
            "exponents": list(self.exponents.elements[: self.x * math.comb(self.k, 2)]),
        }


def edges(k):
    """Edges (i, j), 1 <= i < j <= k, in lexicographic order."""
    return list(itertools.combinations(range(1, k + 1), 2))


def edge_column(fs: FieldSpec, k: int, i: int, j: int, exponent: int):
    column = [0] * k
    column[i - 1] = 1
    column[j - 1] = fs.beta_pow(exponent)
    return tuple(column)


def build_weight2(fs: FieldSpec, k: int, y: int, edge_exponents: Dict[Tuple[int, int], List[int]]) -> GeneratorMatrix:
    """
    y copies of I_k followed by one column e_i + beta^e e_j per listed exponent.

    Args:
        fs (FieldSpec): Field of the entries
        k (int): Number of strands
        y (int): Copies of each weight-1 column
        edge_exponents (dict): (i, j) with 1 <= i < j <= k -> list of exponents

    Returns:
        GeneratorMatrix: Columns in identity-then-lexicographic-edge order
    """
    columns = [(unit_vector(k, i), y) for i in range(k)] if y else []
    for i, j in sorted(edge_exponents):
        if not 1 <= i < j <= k:
            raise InputError(f"edge ({i}, {j}) is not a pair 1 <= i < j <= {k}")
        for exponent in edge_exponents[(i, j)]:
            columns.append(edge_column(fs, k, i, j, exponent))
    return GeneratorMatrix.from_columns(fs, k, columns)


def _edge_assignment(k, x, elements):
    assignment = {}
    for block, edge in enumerate(edges(k)):
        assignment[edge] = list(elements[block * x:(block + 1) * x])
    return assignment


def build_g3(x: int, fs: FieldSpec, exps: ExponentSet, y: int = 1) -> GeneratorMatrix:
    """[I_3 | E_12 | E_13 | E_23] taking consecutive runs of x exponents per block."""
    if fs.p != 2:
        raise InputError("G_3 needs a characteristic-2 field")
    if len(exps) < 3 * x:
        raise ConstructionError(f"need {3 * x} exponents, have {len(exps)}")
    return build_weight2(fs, 3, y, _edge_assignment(3, x, exps.elements))


def build_gk(params: ConstructionParams) -> GeneratorMatrix:
    G = build_weight2(
        params.field,
        params.k,
        params.y,
        _edge_assignment(params.k, params.x, params.exponents.elements),
    )
    logger.debug("built G_%d(%d,%d) over GF(%d), n=%d", params.k, params.x, params.y, params.field.q, G.n)
    return G


def build_k2_uniform(fs: FieldSpec, x1: int, a: int) -> GeneratorMatrix:
    """x1 copies of e_1 and e_2 plus a copies of every (1, beta^i)."""
    columns = [((1, 0), x1), ((0, 1), x1)]
    if a:
        columns.extend(((1, fs.beta_pow(i)), a) for i in range(fs.order))
    return GeneratorMatrix.from_columns(fs, 2, columns)


def construction_for(k: int, x: int, y: int, q: Optional[int] = None) -> ConstructionParams:
    """
    Parameters of G_k(x, y) with searched exponents.

    When q is omitted the smallest field GF(2^m) on which the greedy search reaches
    x * C(k, 2) exponents is used.
    """
    size = x * math.comb(k, 2)
    if q is not None:
        field = _field_of_order(q)
        exponents = bk_set_search(k, q, size)
    else:
        limit = get_settings().max_field_order
        m = max(1, (size + 1).bit_length())
        while True:
            q = 1 << m
            if q > limit:
                raise ConstructionError(f"no field up to order {limit} holds {size} exponents for k = {k}")
            try:
                exponents = bk_set_search(k, q, size)
                break
            except ConstructionError:
                m += 1
        field = build_field(2, m)
    try:
        return ConstructionParams(k=k, x=x, y=y, field=field, exponents=exponents)
    except ValidationError as e:
        raise InputError(str(e.errors()[0].get("msg", e))) from e


def _field_of_order(q):
    p, m = split_prime_power(q)
    return build_field(p, m)


class RecoveryCertificate(BaseModel):
    complete: bool
    reason: str = ""
    columns: Tuple[int, ...] = ()  # 1-based indices into the expanded column list


def _simple_cycles(k):
    """Simple cycles of K_k on vertices 0..k-1, length >= 3, one per rotation/reflection class."""
    cycles = []

    def extend(path, visited):
        if len(path) >= 3 and path[1] < path[-1]:
            cycles.append(tuple(path))
        for v in range(path[0] + 1, k):
            if v not in visited:
                visited.add(v)
                path.append(v)
                extend(path, visited)
                path.pop()
                visited.discard(v)

    for start in range(k):
        extend([start], {start})
    return cycles


def verify_recovery_complete(G: GeneratorMatrix) -> RecoveryCertificate:
    """
    Check that distinct columns inside one edge block are independent and that every
    choice of one column per edge of a simple cycle gives independent columns.

    Args:
        G (GeneratorMatrix): Matrix whose columns have weight 1 or 2

    Returns:
        RecoveryCertificate: complete flag, and the violating columns when it fails
    """
    fs, k = G.field, G.k
    if k > MAX_VERIFY_K:
        raise GuardError(f"verifier handles k <= {MAX_VERIFY_K}, got k = {k}")

    blocks = {}
    for index, column in enumerate(G.expanded_columns(), start=1):
        support = tuple(j for j, c in enumerate(column) if c)
        if len(support) > 2:
            raise InputError(f"column {index} has weight {len(support)} > 2")
        if len(support) == 2:
            blocks.setdefault(support, []).append((index, column))

    cycles = _simple_cycles(k)
    checks = 0
    for cycle in cycles:
        count = 1
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            count *= len(blocks.get((min(a, b), max(a, b)), ()))
        checks += count
    if checks > MAX_VERIFY_CHECKS:
        raise GuardError(f"{checks} cycle column choices exceed the verifier guard {MAX_VERIFY_CHECKS}")

    for (i, j), members in sorted(blocks.items()):
        seen = {}
        for index, column in members:
            rep = canonical_representative(fs, column)
            if rep in seen:
                return RecoveryCertificate(
                    complete=False,
                    reason=f"collinear columns in edge block ({i + 1}, {j + 1})",
                    columns=(seen[rep], index),
                )
            seen[rep] = index

    for cycle in cycles:
        cycle_blocks = []
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            cycle_blocks.append(blocks.get((min(a, b), max(a, b)), []))
        if not all(cycle_blocks):
            continue
        for choice in itertools.product(*cycle_blocks):
            basis = echelon_basis(fs, k)
            if not all(basis.insert(column) for _, column in choice):
                path = "-".join(str(v + 1) for v in cycle)
                return RecoveryCertificate(
                    complete=False,
                    reason=f"dependent columns on cycle {path}",
                    columns=tuple(index for index, _ in choice),
                )

    logger.debug("verified %d cycles with %d column choices", len(cycles), checks)
    return RecoveryCertificate(complete=True, reason="recovery complete")
