"""
Generator matrices as column multisets over GF(q)^k.
Provides incremental row-echelon state for span membership, collinearity classes,
the k=2 profile with its balancing transforms, and the plain-text matrix format.
"""

import logging
from pathlib import Path
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from utils.errors import InputError
from utils.gf import FieldSpec, field_for_order

logger = logging.getLogger(__name__)

Vector = Tuple[int, ...]


class EchelonBasis:
    """
    Row-echelon state of a growing set of vectors over GF(q).

    Rows are kept in insertion order, each scaled to 1 at its pivot and already
    reduced by every earlier row, so reducing a vector in that order is exact.
    """

    def __init__(self, field, k):
        self.field = field
        self.k = k
        self.rows = []  # (pivot, row)

    def _reduce(self, vector):
        fs = self.field
        v = list(vector)
        for pivot, row in self.rows:
            c = v[pivot]
            if c == 0:
                continue
            for j in range(pivot, self.k):
                if row[j]:
                    v[j] = fs.sub(v[j], fs.mul(c, row[j]))
        return v

    def insert(self, vector):
        """Add a vector; returns True if the rank grew."""
        v = self._reduce(vector)
        for pivot, c in enumerate(v):
            if c:
                scale = self.field.inv(c)
                self.rows.append((pivot, [self.field.mul(scale, e) for e in v]))
                return True
        return False

    def contains(self, vector):
        return not any(self._reduce(vector))

    def contains_unit(self, i):
        return self.contains(unit_vector(self.k, i))

    @property
    def rank(self):
        return len(self.rows)

    def copy(self):
        clone = self.__class__.__new__(self.__class__)
        clone.field = self.field
        clone.k = self.k
        clone.rows = list(self.rows)
        return clone


class BinaryEchelonBasis(EchelonBasis):
    """GF(2) variant with each vector packed into an int bitmask (bit j = coordinate j)."""

    @staticmethod
    def _pack(vector):
        mask = 0
        for j, c in enumerate(vector):
            if c:
                mask |= 1 << j
        return mask

    def _reduce_mask(self, mask):
        for pivot, row in self.rows:
            if (mask >> pivot) & 1:
                mask ^= row
        return mask

    def insert(self, vector):
        mask = self._reduce_mask(self._pack(vector))
        if mask == 0:
            return False
        pivot = (mask & -mask).bit_length() - 1
        self.rows.append((pivot, mask))
        return True

    def contains(self, vector):
        return self._reduce_mask(self._pack(vector)) == 0

    def contains_unit(self, i):
        return self._reduce_mask(1 << i) == 0


def echelon_basis(field: FieldSpec, k: int) -> EchelonBasis:
    """Empty echelon state, bit-packed when q = 2."""
    if field.q == 2:
        return BinaryEchelonBasis(field, k)
    return EchelonBasis(field, k)


def unit_vector(k, i):
    """Standard basis vector e_i with 0-based index i."""
    return tuple(1 if j == i else 0 for j in range(k))


def _check_vectors(field, k, vectors):
    for v in vectors:
        if len(v) != k:
            raise InputError(f"vector {tuple(v)} has length {len(v)}, expected {k}")
        for c in v:
            field.check_element(c)


def span_contains(field: FieldSpec, columns, target) -> bool:
    """
    Decide whether target lies in the GF(q)-span of the given columns.

    Args:
        field (FieldSpec): Field of the coordinates
        columns (iterable): Vectors of a common length k
        target (tuple): Vector of length k

    Returns:
        bool: True if target is a linear combination of the columns
    """
    k = len(target)
    columns = [tuple(c) for c in columns]
    _check_vectors(field, k, columns + [tuple(target)])
    basis = echelon_basis(field, k)
    for column in columns:
        basis.insert(column)
    return basis.contains(target)


def rank(field: FieldSpec, vectors) -> int:
    vectors = [tuple(v) for v in vectors]
    if not vectors:
        return 0
    k = len(vectors[0])
    _check_vectors(field, k, vectors)
    basis = echelon_basis(field, k)
    for v in vectors:
        basis.insert(v)
    return basis.rank


def canonical_representative(field: FieldSpec, vector) -> Vector:
    """Scale a nonzero vector so that its first nonzero coordinate is 1."""
    for c in vector:
        if c:
            scale = field.inv(c)
            return tuple(field.mul(scale, e) for e in vector)
    raise InputError("the zero vector has no collinearity class")


class GeneratorMatrix(BaseModel):
    """A full-rank k x n matrix over GF(q) stored as distinct columns with multiplicities."""

    model_config = ConfigDict(frozen=True)

    field: FieldSpec
    k: int
    columns: Tuple[Tuple[Vector, int], ...]

    @model_validator(mode="after")
    def _check_matrix(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        vectors = []
        for vector, multiplicity in self.columns:
            if multiplicity < 1:
                raise ValueError(f"multiplicity {multiplicity} of {vector} must be positive")
            if not any(vector):
                raise ValueError("zero columns are not allowed")
            vectors.append(vector)
        _check_vectors(self.field, self.k, vectors)
        if rank(self.field, vectors) != self.k:
            raise ValueError(f"matrix does not have full rank {self.k}")
        return self

    @property
    def q(self):
        return self.field.q

    @property
    def n(self):
        return sum(m for _, m in self.columns)

    def expanded_columns(self) -> List[Vector]:
        expanded = []
        for vector, multiplicity in self.columns:
            expanded.extend([vector] * multiplicity)
        return expanded

    @classmethod
    def from_columns(cls, field, k, columns):
        """
        Build a matrix from a column list, merging identical vectors into multiplicities.

        Args:
            field (FieldSpec): Coordinate field
            k (int): Number of rows
            columns (iterable): Vectors, or (vector, multiplicity) pairs

        Returns:
            GeneratorMatrix: Validated matrix
        """
        counts = {}
        for entry in columns:
            if len(entry) == 2 and isinstance(entry[0], (tuple, list)):
                vector, multiplicity = tuple(entry[0]), entry[1]
            else:
                vector, multiplicity = tuple(entry), 1
            counts[vector] = counts.get(vector, 0) + multiplicity
        try:
            return cls(field=field, k=k, columns=tuple(counts.items()))
        except ValidationError as e:
            raise InputError(_first_error(e)) from e


def _first_error(error):
    details = error.errors()
    if details:
        return str(details[0].get("msg", error))
    return str(error)


def identity_matrix(field: FieldSpec, k: int, copies: int = 1) -> GeneratorMatrix:
    return GeneratorMatrix.from_columns(field, k, [(unit_vector(k, i), copies) for i in range(k)])


def projective_classes(G: GeneratorMatrix) -> List[Tuple[Vector, int]]:
    """Merge collinear columns; returns (canonical representative, total multiplicity) by first appearance."""
    classes = {}
    for vector, multiplicity in G.columns:
        rep = canonical_representative(G.field, vector)
        classes[rep] = classes.get(rep, 0) + multiplicity
    return list(classes.items())


class TwoDimProfile(BaseModel):
    """Column counts of a k=2 matrix per collinearity class <e_1>, <e_2>, <(1, beta^i)>."""

    model_config = ConfigDict(frozen=True)

    x1: int
    x2: int
    a: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_counts(self):
        if self.x1 < 0 or self.x2 < 0 or any(v < 0 for v in self.a):
            raise ValueError("profile counts must be non-negative")
        if self.x < 1:
            raise ValueError("profile must contain at least one column")
        return self

    @property
    def x(self):
        return self.x1 + self.x2 + sum(self.a)


def _require_k2(G):
    if G.k != 2:
        raise InputError(f"operation needs k = 2, got k = {G.k}")


def profile_k2(G: GeneratorMatrix) -> TwoDimProfile:
    _require_k2(G)
    fs = G.field
    x1 = x2 = 0
    a = [0] * fs.order
    for (c0, c1), multiplicity in projective_classes(G):
        if c1 == 0:
            x1 += multiplicity
        elif c0 == 0:
            x2 += multiplicity
        else:
            a[fs.discrete_log(c1)] += multiplicity
    return TwoDimProfile(x1=x1, x2=x2, a=tuple(a))


def _concatenate(G, mirrored):
    return GeneratorMatrix.from_columns(G.field, G.k, list(G.columns) + mirrored)


def balance_info_columns(G: GeneratorMatrix) -> GeneratorMatrix:
    """
    Append a copy of G with the e_1 and e_2 classes exchanged.

    Args:
        G (GeneratorMatrix): k=2 matrix

    Returns:
        GeneratorMatrix: 2n columns with x1 = x2 = x1(G) + x2(G)
    """
    _require_k2(G)
    mirrored = []
    for (c0, c1), multiplicity in G.columns:
        if c1 == 0:
            mirrored.append(((0, c0), multiplicity))
        elif c0 == 0:
            mirrored.append(((c1, 0), multiplicity))
        else:
            mirrored.append(((c0, c1), multiplicity))
    logger.debug("balancing information columns of a %d-column matrix", G.n)
    return _concatenate(G, mirrored)


def balance_slope_columns(G: GeneratorMatrix, i: int, j: int) -> GeneratorMatrix:
    """Append a copy of G with the (1, beta^i) and (1, beta^j) classes exchanged."""
    _require_k2(G)
    fs = G.field
    if i == j or not (0 <= i < fs.order and 0 <= j < fs.order):
        raise InputError(f"class indices {i}, {j} must be distinct and in [0, {fs.order - 1}]")
    profile = profile_k2(G)
    if profile.a[i] == profile.a[j]:
        raise InputError(f"classes {i} and {j} already hold {profile.a[i]} columns each")

    mirrored = []
    for (c0, c1), multiplicity in G.columns:
        if c0 and c1:
            slope = fs.discrete_log(fs.div(c1, c0))
            if slope == i:
                c1 = fs.mul(c0, fs.beta_pow(j))
            elif slope == j:
                c1 = fs.mul(c0, fs.beta_pow(i))
        mirrored.append(((c0, c1), multiplicity))
    return _concatenate(G, mirrored)


def _content_lines(text):
    for line in text.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            yield stripped


def parse_matrix(text: str) -> GeneratorMatrix:
    """Parse the `q k n` header followed by k rows of n field elements."""
    lines = list(_content_lines(text))
    if not lines:
        raise InputError("matrix text is empty")
    try:
        q, k, n = (int(t) for t in lines[0].split())
        rows = [[int(t) for t in line.split()] for line in lines[1:]]
    except ValueError as e:
        raise InputError(f"malformed matrix text: {e}") from e
    if len(rows) != k:
        raise InputError(f"expected {k} rows, found {len(rows)}")
    for row in rows:
        if len(row) != n:
            raise InputError(f"expected {n} entries per row, found {len(row)}")
    field = field_for_order(q)
    columns = [tuple(rows[r][c] for r in range(k)) for c in range(n)]
    return GeneratorMatrix.from_columns(field, k, columns)


def format_matrix(G: GeneratorMatrix, comment: str = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {line}" for line in comment.splitlines())
    columns = G.expanded_columns()
    lines.append(f"{G.q} {G.k} {G.n}")
    for r in range(G.k):
        lines.append(" ".join(str(col[r]) for col in columns))
    return "\n".join(lines) + "\n"


def read_matrix(path) -> GeneratorMatrix:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read matrix file {path}: {e}") from e
    return parse_matrix(text)


def write_matrix(G: GeneratorMatrix, path, comment: str = None) -> None:
    Path(path).write_text(format_matrix(G, comment), encoding="utf-8")
