import random
from fractions import Fraction

import pytest

from symcirc.circuit import Builder, evaluate, verify_symmetry
from symcirc.graphs import BipartitePattern, WeightedHost, all_01_hosts
from symcirc.oracle import SparsePolynomial, brute_hom, brute_sub, expand_circuit
from symcirc.partitions import CapExceeded
from symcirc.synth import (
    extract_coefficient,
    hom_size_bound,
    synth_biclique,
    synth_hom,
    synth_sub_cover,
    synth_sub_moebius,
    vandermonde_inverse,
)
from symcirc.treedec import TreeDecomposition, exact_treewidth

K2 = BipartitePattern(1, 1, ((0, 0, 1),))
P3 = BipartitePattern(1, 2, ((0, 0, 1), (0, 1, 1)))
C4 = BipartitePattern(2, 2, ((0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)))
TWO_K2 = BipartitePattern(2, 2, ((0, 0, 1), (1, 1, 1)))
STAR3 = BipartitePattern(1, 3, ((0, 0, 1), (0, 1, 1), (0, 2, 1)))


def test_hom_examples():
    assert evaluate(synth_hom(K2, None, 2, 2).circuit, WeightedHost.constant(2, 2)) == 4
    assert evaluate(synth_hom(P3, None, 2, 2).circuit, WeightedHost.identity(2)) == 2
    rng = random.Random(0)
    c = synth_hom(C4, None, 3, 3).circuit
    for _ in range(5):
        host = WeightedHost.random(rng, 3, 3)
        assert evaluate(c, host) == brute_hom(C4, host)


def test_hom_with_supplied_decomposition():
    td = TreeDecomposition.single_bag(C4.vertices())
    rep = synth_hom(C4, td, 3, 2)
    host = WeightedHost.random(random.Random(1), 3, 2)
    assert evaluate(rep.circuit, host) == brute_hom(C4, host)


def test_hom_rejects_invalid_decomposition():
    bad = TreeDecomposition((frozenset({(0, 0), (1, 0)}), frozenset({(1, 1)})), ((0, 1),))
    with pytest.raises(ValueError):
        synth_hom(P3, bad, 2, 2)


def test_hom_support_and_symmetry():
    rng = random.Random(2)
    for _ in range(10):
        left, right = rng.randint(1, 3), rng.randint(1, 3)
        f = BipartitePattern(left, right, tuple((a, b, rng.randint(1, 2)) for a in range(left) for b in range(right) if rng.random() < 0.6))
        n, m = rng.randint(2, 3), rng.randint(2, 3)
        rep = synth_hom(f, None, n, m)
        k = rep.stats["k"]
        assert rep.max_sup <= k
        assert verify_symmetry(rep.circuit)
        if rep.conforming:
            assert rep.size <= rep.bound
        host = WeightedHost.random(rng, n, m)
        assert evaluate(rep.circuit, host) == brute_hom(f, host)


def test_size_bound_formula():
    assert hom_size_bound(2, 3, 3, 5) == 5 * 4 * 2 * 6**3 * 25


def test_sub_moebius_examples():
    assert evaluate(synth_sub_moebius(P3, 2, 2).circuit, WeightedHost.constant(2, 2)) == 2
    assert evaluate(synth_sub_moebius(K2, 2, 2).circuit, WeightedHost.constant(2, 2)) == 4
    assert evaluate(synth_sub_moebius(TWO_K2, 3, 3).circuit, WeightedHost.identity(3)) == 3


def test_sub_moebius_matches_brute():
    rng = random.Random(3)
    for f in (P3, C4, TWO_K2, STAR3):
        rep = synth_sub_moebius(f, 3, 3)
        assert verify_symmetry(rep.circuit)
        for _ in range(4):
            host = WeightedHost.random(rng, 3, 3)
            assert evaluate(rep.circuit, host) == brute_sub(f, host)


def test_sub_cover_complete_pattern():
    for n, m in ((2, 2), (2, 3), (3, 3)):
        c = synth_sub_cover(BipartitePattern.complete(n, m), n, m).circuit
        p = expand_circuit(c)
        assert len(p) == 1 and list(p.terms.values()) == [1]
        rows = [[1] * m for _ in range(n)]
        rows[0][0] = 0
        assert evaluate(c, WeightedHost.from_rows(rows)) == 0


def test_sub_cover_star_vs_moebius():
    rng = random.Random(4)
    cover = synth_sub_cover(STAR3, 4, 4).circuit
    moeb = synth_sub_moebius(STAR3, 4, 4).circuit
    for _ in range(10):
        host = WeightedHost.random_01(rng, 4, 4)
        assert evaluate(cover, host) == evaluate(moeb, host)


def test_sub_cover_matching_complement():
    f = BipartitePattern(3, 3, tuple((a, b, 1) for a in range(3) for b in range(3) if a != b))
    c = synth_sub_cover(f, 3, 3).circuit
    host = WeightedHost.from_rows([[0 if a == b else 1 for b in range(3)] for a in range(3)])
    assert evaluate(c, host) == brute_sub(f, host) == 1


def test_sub_cover_rejects_multigraph_and_cap():
    with pytest.raises(ValueError):
        synth_sub_cover(BipartitePattern(1, 1, ((0, 0, 2),)), 2, 2)
    with pytest.raises(CapExceeded):
        synth_sub_cover(TWO_K2, 4, 4, cap=1)


def test_sub_cover_symmetric():
    assert verify_symmetry(synth_sub_cover(P3, 3, 3).circuit)


def test_biclique_examples():
    ones = WeightedHost.constant(2, 2)
    assert evaluate(synth_biclique("k", 1, 2).circuit, ones) == 4
    full = synth_biclique("n-k", 0, 3).circuit
    p = expand_circuit(full)
    assert len(p) == 1 and sum(e for _, e in next(iter(p.terms))) == 9
    rng = random.Random(5)
    bic = synth_biclique("k", 2, 3).circuit
    moeb = synth_sub_moebius(BipartitePattern.complete(2, 2), 3, 3).circuit
    for _ in range(10):
        host = WeightedHost.random_01(rng, 3, 3)
        assert evaluate(bic, host) == evaluate(moeb, host)


def test_biclique_size_bound():
    for k in (1, 2):
        for n in (2, 3, 4):
            rep = synth_biclique("k", k, n)
            assert rep.within_bound
            assert verify_symmetry(rep.circuit)


def _poly_circuit(builder_fn):
    b = Builder(1, 1)
    out = builder_fn(b)
    return b.build(out)


def test_extract_linear_coefficient():
    c = _poly_circuit(lambda b: b.add([b.const(3), b.scale(5, b.var("t"))]))
    got = extract_coefficient(c, ["t"], [1], 1)
    assert evaluate(got, WeightedHost.constant(1, 1)) == 5


def test_extract_constant_term_of_square():
    c = _poly_circuit(lambda b: b.power(b.add([b.inp(0, 0), b.var("t")]), 2))
    got = extract_coefficient(c, ["t"], [0], 2)
    assert evaluate(got, WeightedHost.from_rows([[2]])) == 4


def test_extract_every_coefficient_of_random_polynomial():
    rng = random.Random(6)
    coeffs = {(i, j): Fraction(rng.randint(-7, 7), rng.randint(1, 3)) for i in range(4) for j in range(4) if i + j <= 3}

    def build(b):
        t, s = b.var("t"), b.var("s")
        return b.linear_combination([(c, b.mul([(t, i), (s, j)]) if i + j else b.one) for (i, j), c in coeffs.items()])

    c = _poly_circuit(build)
    host = WeightedHost.constant(1, 1)
    for (i, j), want in coeffs.items():
        got = extract_coefficient(c, ["t", "s"], [i, j], 3)
        assert evaluate(got, host) == want


def test_vandermonde_rejects_repeated_points():
    with pytest.raises(ValueError):
        vandermonde_inverse((Fraction(0), Fraction(0)))
