"""
Tests for generator matrices, span membership, the k=2 profile and the matrix text format.
"""

import sys
import os
import random
from fractions import Fraction

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import pytest

from engines.codes import (
    GeneratorMatrix,
    balance_info_columns,
    balance_slope_columns,
    canonical_representative,
    format_matrix,
    identity_matrix,
    parse_matrix,
    profile_k2,
    projective_classes,
    rank,
    read_matrix,
    span_contains,
    write_matrix,
)
from engines.exact import exact_expectation, k2_expectation
from utils.errors import InputError
from utils.gf import build_field, field_for_order

EXAMPLE_1 = [(1, 0), (0, 1), (1, 0), (0, 1), (1, 1)]


def example_1(q=2):
    return GeneratorMatrix.from_columns(field_for_order(q), 2, EXAMPLE_1)


def test_span_examples():
    fs = build_field(2, 1)
    assert span_contains(fs, [(0, 1), (1, 1)], (1, 0))
    assert not span_contains(fs, [(1, 1)], (1, 0))
    assert not span_contains(fs, [], (1, 0))
    assert span_contains(fs, [], (0, 0))


def test_span_matches_rank_test():
    rng = random.Random(7)
    for q in (2, 3, 4, 5, 8):
        fs = field_for_order(q)
        for _ in range(60):
            columns = [tuple(rng.randrange(q) for _ in range(3)) for _ in range(rng.randrange(1, 4))]
            target = tuple(rng.randrange(q) for _ in range(3))
            expected = rank(fs, columns + [target]) == rank(fs, columns)
            assert span_contains(fs, columns, target) == expected


def test_span_is_monotone():
    rng = random.Random(11)
    fs = field_for_order(4)
    target = (1, 0, 0)
    columns = []
    found = False
    for _ in range(12):
        columns.append(tuple(rng.randrange(4) for _ in range(3)))
        now = span_contains(fs, columns, target)
        assert now or not found
        found = now


def test_span_dimension_mismatch():
    fs = build_field(2, 1)
    with pytest.raises(InputError):
        span_contains(fs, [(1, 0, 0)], (1, 0))
    with pytest.raises(InputError):
        span_contains(fs, [(2, 0)], (1, 0))


def test_matrix_validation():
    fs = build_field(2, 2)
    with pytest.raises(InputError):
        GeneratorMatrix.from_columns(fs, 2, [(1, 0), (1, 0)])
    with pytest.raises(InputError):
        GeneratorMatrix.from_columns(fs, 2, [(1, 0), (0, 1), (0, 0)])
    G = GeneratorMatrix.from_columns(fs, 2, [(1, 0), ((0, 1), 3), (1, 0)])
    assert G.n == 5
    assert dict(G.columns) == {(1, 0): 2, (0, 1): 3}
    assert len(G.expanded_columns()) == 5
    assert identity_matrix(fs, 3, copies=2).n == 6


def test_canonical_representative_and_classes():
    fs = build_field(3, 1)
    assert canonical_representative(fs, (0, 2, 1)) == (0, 1, 2)
    G = GeneratorMatrix.from_columns(fs, 2, [(1, 2), (2, 1), ((1, 0), 2), (0, 1)])
    assert projective_classes(G) == [((1, 2), 2), ((1, 0), 2), ((0, 1), 1)]
    with pytest.raises(InputError):
        canonical_representative(fs, (0, 0))


def test_profile_example_1():
    profile = profile_k2(example_1(2))
    assert (profile.x1, profile.x2, profile.a, profile.x) == (2, 2, (1,), 5)
    profile = profile_k2(example_1(4))
    assert (profile.x1, profile.x2, profile.a) == (2, 2, (1, 0, 0))


def test_profile_identity_and_scaled_column():
    profile = profile_k2(identity_matrix(field_for_order(7), 2))
    assert (profile.x1, profile.x2, sum(profile.a)) == (1, 1, 0)
    G = GeneratorMatrix.from_columns(field_for_order(5), 2, [(1, 0), (0, 1), (2, 2)])
    assert profile_k2(G).a == (1, 0, 0, 0)


def test_profile_needs_k2():
    with pytest.raises(InputError):
        profile_k2(identity_matrix(build_field(2, 1), 3))


def test_balance_info_columns():
    fs = build_field(2, 1)
    G = GeneratorMatrix.from_columns(fs, 2, [((1, 0), 3), (0, 1), (1, 1)])
    balanced = balance_info_columns(G)
    profile = profile_k2(balanced)
    assert balanced.n == 2 * G.n
    assert (profile.x1, profile.x2, profile.a) == (4, 4, (2,))
    before, after = exact_expectation(G), exact_expectation(balanced)
    assert after.exact_t_max < before.exact_t_max
    assert sum(after.exact) <= sum(before.exact)


def test_balance_info_on_symmetric_matrix_keeps_t_max():
    G = example_1(2)
    assert exact_expectation(balance_info_columns(G)).exact_t_max == exact_expectation(G).exact_t_max


def test_balance_info_lowers_t_max_on_random_matrices():
    rng = random.Random(3)
    fs = field_for_order(4)
    checked = 0
    while checked < 100:
        x1, x2 = rng.randrange(0, 5), rng.randrange(0, 5)
        a = [rng.randrange(0, 3) for _ in range(fs.order)]
        if x1 == x2 or x1 + x2 + sum(a) < 2:
            continue
        columns = [((1, 0), x1), ((0, 1), x2)] + [((1, fs.beta_pow(i)), a[i]) for i in range(fs.order)]
        columns = [c for c in columns if c[1]]
        try:
            G = GeneratorMatrix.from_columns(fs, 2, columns)
        except InputError:
            continue
        before = k2_expectation(profile_k2(G))
        after = k2_expectation(profile_k2(balance_info_columns(G)))
        assert max(after) < max(before)
        assert sum(after) <= sum(before)
        checked += 1


def test_balance_slope_columns():
    fs = build_field(5, 1)
    G = GeneratorMatrix.from_columns(fs, 2, [((1, 0), 2), ((0, 1), 2), ((1, 1), 2)])
    balanced = balance_slope_columns(G, 0, 1)
    assert profile_k2(balanced).a == (2, 2, 0, 0)
    assert max(k2_expectation(profile_k2(balanced))) < max(k2_expectation(profile_k2(G)))


def test_balance_slope_rejects_equal_classes():
    G = GeneratorMatrix.from_columns(field_for_order(4), 2, EXAMPLE_1 + [(1, 2)])
    with pytest.raises(InputError):
        balance_slope_columns(G, 0, 1)
    with pytest.raises(InputError):
        balance_slope_columns(G, 0, 0)


def test_parse_matrix_with_comments():
    text = "# Example 1\n2 2 5\n1 0 1 0 1\n\n0 1 0 1 1\n"
    G = parse_matrix(text)
    assert (G.q, G.k, G.n) == (2, 2, 5)
    assert dict(G.columns) == {(1, 0): 2, (0, 1): 2, (1, 1): 1}


def test_format_matrix_expands_multiplicities():
    G = example_1(2)
    text = format_matrix(G, comment="example")
    lines = text.splitlines()
    assert lines[0] == "# example"
    assert lines[1] == "2 2 5"
    assert lines[2] == "1 1 0 0 1"
    assert lines[3] == "0 0 1 1 1"
    assert parse_matrix(text) == G


def test_parse_matrix_errors():
    with pytest.raises(InputError):
        parse_matrix("")
    with pytest.raises(InputError):
        parse_matrix("2 2 2\n1 0\n")
    with pytest.raises(InputError):
        parse_matrix("2 2 2\n1 0\n0 1 1\n")
    with pytest.raises(InputError):
        parse_matrix("6 2 2\n1 0\n0 1\n")
    with pytest.raises(InputError):
        parse_matrix("2 2 2\n1 x\n0 1\n")
    with pytest.raises(InputError):
        parse_matrix("2 2 2\n1 1\n0 0\n")


def test_read_and_write_matrix(tmp_path):
    G = GeneratorMatrix.from_columns(field_for_order(8), 3, [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 3, 5)])
    path = tmp_path / "g.txt"
    write_matrix(G, path, comment="k=3 over GF(8)")
    assert read_matrix(path) == G
    with pytest.raises(InputError):
        read_matrix(tmp_path / "missing.txt")


def test_balance_slope_lowers_both_strands_on_random_profiles():
    rng = random.Random(8)
    checked = 0
    while checked < 100:
        fs = field_for_order(rng.choice([3, 4, 5, 7, 8]))
        x1, x2 = rng.randrange(0, 4), rng.randrange(0, 4)
        a = [rng.randrange(0, 4) for _ in range(fs.order)]
        i, j = rng.sample(range(fs.order), 2)
        if a[i] == a[j]:
            continue
        columns = [((1, 0), x1), ((0, 1), x2)] + [((1, fs.beta_pow(c)), a[c]) for c in range(fs.order)]
        try:
            G = GeneratorMatrix.from_columns(fs, 2, [c for c in columns if c[1]])
        except InputError:
            continue
        x, ai, aj = G.n, a[i], a[j]
        # Only the two swapped classes change their term; strict convexity makes it negative
        change = Fraction(2 * (ai + aj), 2 * x - ai - aj) - Fraction(ai, x - ai) - Fraction(aj, x - aj)
        assert change < 0
        before = k2_expectation(profile_k2(G))
        after = k2_expectation(profile_k2(balance_slope_columns(G, i, j)))
        assert after[0] - before[0] == change
        assert after[1] - before[1] == change
        assert max(after) < max(before)
        checked += 1
