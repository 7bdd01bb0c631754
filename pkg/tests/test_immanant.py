import random
from fractions import Fraction
from itertools import permutations
from math import factorial

import pytest

from symcirc.circuit import evaluate, verify_symmetry
from symcirc.graphs import WeightedHost
from symcirc.immanant import (
    IntegerPartition,
    brute_force_immanant,
    calibrate,
    character_table,
    character_value,
    class_size,
    cofactor_determinant,
    enumerate_cycle_covers,
    hook_length_dimension,
    integer_partitions,
    synth_imm_fI,
    synth_immanant,
    synth_symmetric_determinant,
)
from symcirc.partitions import CapExceeded


def _matrix(rng, n):
    return [[Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(n)] for _ in range(n)]


def _host(rows):
    return WeightedHost.from_rows(rows)


def test_character_examples():
    for n in range(1, 6):
        for mu in integer_partitions(n):
            assert character_value((n,), mu) == 1
        assert character_value((1,) * n, (n,)) == (-1) ** (n - 1)
    assert character_value((2, 1), (1, 1, 1)) == 2


def test_dimension_matches_hook_length():
    for n in range(1, 7):
        for lam in integer_partitions(n):
            assert character_value(lam, (1,) * n) == hook_length_dimension(lam)


def test_character_orthogonality():
    for n in range(1, 7):
        classes, table = character_table(n)
        sizes = [class_size(mu) for mu in classes]
        assert sum(sizes) == factorial(n)
        for a, row_a in enumerate(table):
            for b, row_b in enumerate(table):
                inner = sum(s * x * y for s, x, y in zip(sizes, row_a, row_b))
                assert inner == (factorial(n) if a == b else 0)


def test_brute_immanant_examples():
    ones = [[1] * 3 for _ in range(3)]
    ident = [[int(i == j) for j in range(3)] for i in range(3)]
    assert brute_force_immanant((3,), ones) == 6
    assert brute_force_immanant((1, 1, 1), ident) == 1
    assert brute_force_immanant((2, 1), ident) == 2


def test_determinant_circuit():
    c = synth_symmetric_determinant(3)
    assert evaluate(c, WeightedHost.identity(3)) == 1
    assert evaluate(c, WeightedHost.constant(3, 3)) == 0
    rng = random.Random(0)
    c4 = synth_symmetric_determinant(4)
    assert verify_symmetry(c4)
    for _ in range(3):
        m = _matrix(rng, 4)
        assert evaluate(c4, _host(m)) == cofactor_determinant(m)


def test_cycle_cover_families():
    assert len(enumerate_cycle_covers(3, (0, 0, 1)).tuples) == 2
    assert len(enumerate_cycle_covers(2, (0, 1)).tuples) == 1
    # ordered triples of fixed points that may repeat: 3^3
    assert len(enumerate_cycle_covers(3, (3,)).tuples) == 27
    assert enumerate_cycle_covers(2, (0, 0, 1)).tuples == ()


def _brute_f(index, m):
    from collections import Counter

    n = len(m)
    total = Fraction(0)
    for perm in permutations(range(n)):
        seen, ctype = set(), []
        for s in range(n):
            if s in seen:
                continue
            length, cur = 0, s
            while cur not in seen:
                seen.add(cur)
                cur = perm[cur]
                length += 1
            ctype.append(length)
        counts = Counter(ctype)
        sgn = (-1) ** (n - len(ctype))
        f = sgn
        for l, i in enumerate(index, 1):
            f *= counts.get(l, 0) ** i
        term = Fraction(f)
        for i in range(n):
            term *= m[i][perm[i]]
        total += term
    return total


def test_f_index_examples():
    ident = WeightedHost.identity(2)
    assert evaluate(synth_imm_fI((), 2), ident) == 1
    assert evaluate(synth_imm_fI((0, 1), 2), _host([[0, 1], [1, 0]])) == -1
    assert evaluate(synth_imm_fI((1,), 2), ident) == 2


def test_f_index_random():
    rng = random.Random(1)
    for index in ((1,), (2,), (0, 1), (1, 1), (0, 0, 1)):
        c = synth_imm_fI(index, 3)
        for _ in range(3):
            m = _matrix(rng, 3)
            assert evaluate(c, _host(m)) == _brute_f(index, m)


def test_calibration_consistent():
    for n in range(1, 6):
        for lam in integer_partitions(n):
            part = IntegerPartition(lam)
            if part.b <= 4:
                assert calibrate(part).consistent


def test_immanant_examples():
    perm3 = synth_immanant((3,)).circuit
    assert evaluate(perm3, WeightedHost.constant(3, 3)) == 6
    det3 = synth_immanant((1, 1, 1)).circuit
    assert evaluate(det3, WeightedHost.identity(3)) == 1
    c = synth_immanant((2, 1)).circuit
    assert verify_symmetry(c)
    rng = random.Random(2)
    for _ in range(10):
        m = _matrix(rng, 3)
        assert evaluate(c, _host(m)) == brute_force_immanant((2, 1), m)


def test_immanant_caps_and_validation():
    with pytest.raises(CapExceeded):
        synth_immanant((6,), b_cap=4)
    with pytest.raises(ValueError):
        IntegerPartition((1, 2))
    assert IntegerPartition.parse("1,2,2").parts == (2, 2, 1)
