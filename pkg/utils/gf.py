"""
Finite field arithmetic in GF(p^m) driven by log/antilog tables.

An element is an integer in [0, q-1] whose base-p digits are its coefficients in the
polynomial basis, little-endian. The modulus and the primitive element are the
lowest-valued valid choices, so every field is reproducible from (p, m) alone.
"""

import logging
from functools import lru_cache
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, PrivateAttr, model_validator

from utils.errors import GuardError, InputError
from utils.settings import get_settings

logger = logging.getLogger(__name__)

# Integer in [0, q-1]; serialized in decimal
FieldElement = int


def is_prime(n):
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_factors(n):
    """Distinct prime factors of n >= 1, ascending."""
    factors = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            factors.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        factors.append(n)
    return factors


def to_digits(value, p, m):
    digits = []
    for _ in range(m):
        digits.append(value % p)
        value //= p
    return digits


def from_digits(digits, p):
    value = 0
    for d in reversed(digits):
        value = value * p + d
    return value


# Polynomials over GF(p) are little-endian coefficient lists.

def _trim(poly):
    while poly and poly[-1] == 0:
        poly.pop()
    return poly


def _poly_mod(a, b, p):
    a = _trim(list(a))
    b = _trim(list(b))
    inv_lead = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        factor = (a[-1] * inv_lead) % p
        shift = len(a) - len(b)
        for j, coeff in enumerate(b):
            a[shift + j] = (a[shift + j] - factor * coeff) % p
        _trim(a)
    return a


def _poly_mulmod(a, b, modulus, p):
    product = [0] * (len(a) + len(b))
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            product[i + j] = (product[i + j] + ai * bj) % p
    return _poly_mod(product, modulus, p)


def _gf2_mulmod(a, b, modulus_int, m):
    """Carry-less product of two GF(2^m) elements reduced by the modulus."""
    result = 0
    top = 1 << m
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= modulus_int
    return result


def is_irreducible(coeffs, p):
    """
    Trial-division irreducibility test over GF(p).

    Args:
        coeffs (list): Little-endian coefficients, leading coefficient last
        p (int): Prime characteristic

    Returns:
        bool: True if no monic polynomial of degree 1..deg/2 divides the input
    """
    poly = _trim(list(coeffs))
    degree = len(poly) - 1
    if degree < 1:
        return False
    for d in range(1, degree // 2 + 1):
        base = p ** d
        for tail in range(base):
            divisor = to_digits(tail, p, d) + [1]
            if not _poly_mod(poly, divisor, p):
                return False
    return True


def _lowest_irreducible(p, m):
    for tail in range(p ** m):
        candidate = to_digits(tail, p, m) + [1]
        if is_irreducible(candidate, p):
            return tuple(candidate)
    raise InputError(f"no irreducible polynomial of degree {m} over GF({p})")


def _raw_mul(a, b, p, m, modulus):
    if p == 2:
        return _gf2_mulmod(a, b, from_digits(modulus, 2), m)
    product = _poly_mulmod(to_digits(a, p, m), to_digits(b, p, m), list(modulus), p)
    return from_digits(product + [0] * (m - len(product)), p)


def _raw_pow(a, e, p, m, modulus):
    result = 1
    while e:
        if e & 1:
            result = _raw_mul(result, a, p, m, modulus)
        a = _raw_mul(a, a, p, m, modulus)
        e >>= 1
    return result


def _raw_add(a, b, p, m):
    if p == 2:
        return a ^ b
    da = to_digits(a, p, m)
    db = to_digits(b, p, m)
    return from_digits([(x + y) % p for x, y in zip(da, db)], p)


def _lowest_primitive(p, m, modulus):
    q = p ** m
    order = q - 1
    factors = prime_factors(order)
    for candidate in range(1, q):
        if all(_raw_pow(candidate, order // r, p, m, modulus) != 1 for r in factors):
            return candidate
    raise InputError(f"no primitive element found in GF({p}^{m})")


class FieldSpec(BaseModel):
    """GF(p^m) with a fixed modulus, a primitive element beta and its log/antilog tables."""

    model_config = ConfigDict(frozen=True)

    p: int
    m: int
    q: int
    modulus: Tuple[int, ...]
    beta: int

    _exp: List[int] = PrivateAttr(default_factory=list)
    _log: List[int] = PrivateAttr(default_factory=list)
    _zech: List[int] = PrivateAttr(default_factory=list)

    @model_validator(mode="after")
    def _check_parameters(self):
        if not is_prime(self.p):
            raise ValueError(f"characteristic {self.p} is not prime")
        if self.m < 1 or self.q != self.p ** self.m:
            raise ValueError(f"q={self.q} is not {self.p}^{self.m}")
        if len(self.modulus) != self.m + 1 or self.modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree m")
        if not is_irreducible(self.modulus, self.p):
            raise ValueError(f"modulus {self.modulus} is reducible over GF({self.p})")
        if not 0 < self.beta < self.q:
            raise ValueError("beta must be a nonzero field element")
        return self

    def model_post_init(self, __context):
        p, m, q = self.p, self.m, self.q
        order = q - 1
        exp = [0] * order
        x = 1
        for e in range(order):
            exp[e] = x
            x = _raw_mul(x, self.beta, p, m, self.modulus)
        if x != 1 or len(set(exp)) != order:
            raise InputError(f"beta={self.beta} is not primitive in GF({q})")
        log = [-1] * q
        for e, value in enumerate(exp):
            log[value] = e
        self._exp = exp
        self._log = log

        # Zech logarithms: 1 + beta^e = beta^zech[e], -1 when the sum vanishes
        if p != 2 and m > 1:
            zech = [-1] * order
            for e in range(order):
                total = _raw_add(1, exp[e], p, m)
                zech[e] = log[total] if total else -1
            self._zech = zech

    @property
    def order(self):
        """Order of the multiplicative group, q - 1."""
        return self.q - 1

    @property
    def exp_table(self):
        return self._exp

    @property
    def log_table(self):
        return self._log

    def add(self, a, b):
        if self.p == 2:
            return a ^ b
        if self.m == 1:
            return (a + b) % self.p
        if a == 0:
            return b
        if b == 0:
            return a
        la = self._log[a]
        z = self._zech[(self._log[b] - la) % self.order]
        if z < 0:
            return 0
        return self._exp[(la + z) % self.order]

    def neg(self, a):
        if self.p == 2 or a == 0:
            return a
        if self.m == 1:
            return (-a) % self.p
        # -1 = beta^((q-1)/2) in odd characteristic
        return self._exp[(self._log[a] + self.order // 2) % self.order]

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % self.order]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self._exp[(-self._log[a]) % self.order]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e):
        if a == 0:
            if e == 0:
                return 1
            if e < 0:
                raise ZeroDivisionError("zero has no inverse")
            return 0
        return self._exp[(self._log[a] * e) % self.order]

    def beta_pow(self, e):
        return self._exp[e % self.order]

    def discrete_log(self, a):
        if not 0 < a < self.q:
            raise InputError(f"discrete log undefined for {a} in GF({self.q})")
        return self._log[a]

    def check_element(self, a):
        if not 0 <= a < self.q:
            raise InputError(f"{a} is not an element of GF({self.q})")
        return a


def build_field(p: int, m: int) -> FieldSpec:
    """
    Build GF(p^m) with the lowest-valued irreducible modulus and primitive element.

    Args:
        p (int): Prime characteristic
        m (int): Extension degree, m >= 1

    Returns:
        FieldSpec: The field with its tables
    """
    if not is_prime(p):
        raise InputError(f"characteristic {p} is not prime")
    if m < 1:
        raise InputError(f"extension degree {m} must be positive")
    q = p ** m
    guard = get_settings().max_field_order
    if q > guard:
        raise GuardError(f"GF({p}^{m}) has order {q}, above the table guard {guard}")
    return _cached_field(p, m)


@lru_cache(maxsize=None)
def _cached_field(p, m):
    q = p ** m
    modulus = _lowest_irreducible(p, m)
    beta = _lowest_primitive(p, m, modulus)
    logger.debug("GF(%d^%d): modulus=%s beta=%d", p, m, modulus, beta)
    return FieldSpec(p=p, m=m, q=q, modulus=modulus, beta=beta)


def split_prime_power(q: int) -> Tuple[int, int]:
    """Return (p, m) with q = p^m, or raise InputError if q is not a prime power."""
    if q < 2:
        raise InputError(f"field order {q} must be at least 2")
    p = prime_factors(q)[0]
    m = 0
    rest = q
    while rest % p == 0:
        rest //= p
        m += 1
    if rest != 1:
        raise InputError(f"{q} is not a prime power")
    return p, m


def field_for_order(q: int) -> FieldSpec:
    """Build the field of order q, which must be a prime power."""
    return build_field(*split_prime_power(q))


def beta_pow(fs: FieldSpec, e: int) -> FieldElement:
    return fs.beta_pow(e)


def add(fs: FieldSpec, a: FieldElement, b: FieldElement) -> FieldElement:
    return fs.add(a, b)


def mul(fs: FieldSpec, a: FieldElement, b: FieldElement) -> FieldElement:
    return fs.mul(a, b)


def neg(fs: FieldSpec, a: FieldElement) -> FieldElement:
    return fs.neg(a)


def inv(fs: FieldSpec, a: FieldElement) -> FieldElement:
    return fs.inv(a)


def discrete_log(fs: FieldSpec, a: FieldElement) -> int:
    return fs.discrete_log(a)
