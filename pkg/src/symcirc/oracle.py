"""Brute-force ground truth: hom/emb/sub counts, sparse polynomial expansion and identity testing."""

from __future__ import annotations

import random
from collections import defaultdict
from fractions import Fraction
from itertools import permutations, product
from math import lcm
from typing import Iterable, Mapping, Sequence

import numpy as np

from .circuit import ADD, CONST, IN, MUL, VAR, Circuit, degree, evaluate
from .graphs import BipartitePattern, WeightedHost, automorphism_count
from .partitions import CapExceeded

BRUTE_CAP = 8
EXPANSION_CAP = 200_000

Monomial = tuple[tuple[int, int], ...]  # sorted (variable index, exponent) pairs


# --------------------------------------------------------------------------- counts


def _check(pattern: BipartitePattern, cap: int) -> None:
    if pattern.num_vertices > cap:
        raise CapExceeded(f"brute force is capped at {cap} pattern vertices")


def _integer_host(host: WeightedHost) -> tuple[np.ndarray, int]:
    """Numerator matrix and common denominator D with host = N / D."""
    den = lcm(*(x.denominator for row in host.entries for x in row))
    nums = [[int(x * den) for x in row] for row in host.entries]
    return np.array(nums, dtype=object), den


def brute_hom(pattern: BipartitePattern, host: WeightedHost, cap: int = BRUTE_CAP) -> Fraction:
    """Sum over all bipartition-respecting maps h of prod_{ab} G(h(a), h(b))^mult.

    Maps of the left part are enumerated explicitly; each right vertex then
    contributes an independent sum over its image.
    """
    _check(pattern, cap)
    l, r = pattern.left_size, pattern.right_size
    n, m = host.n, host.m
    nums, den = _integer_host(host)
    top = max((abs(int(x)) for x in nums.flat), default=0)
    safe = (n**l) * (m**r) * max(top, 1) ** pattern.num_edges < 2**62
    mat = nums.astype(np.int64) if safe else nums
    maps = np.array(list(product(range(n), repeat=l)), dtype=np.int64).reshape(n**l, l)
    acc = np.ones(len(maps), dtype=mat.dtype)
    nbrs: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for a, b, k in pattern.edges:
        nbrs[b].append((a, k))
    for b in range(r):
        cols = np.ones((len(maps), m), dtype=mat.dtype)
        for a, k in nbrs[b]:
            rows = mat[maps[:, a], :]
            cols = cols * (rows**k if k != 1 else rows)
        acc = acc * cols.sum(axis=1)
    total = int(acc.sum())
    return Fraction(total, den**pattern.num_edges)


def naive_hom(pattern: BipartitePattern, host: WeightedHost, cap: int = 7) -> Fraction:
    """Literal sum over all maps; slow, used to test :func:`brute_hom`."""
    _check(pattern, cap)
    total = Fraction(0)
    for ha in product(range(host.n), repeat=pattern.left_size):
        for hb in product(range(host.m), repeat=pattern.right_size):
            term = Fraction(1)
            for a, b, k in pattern.edges:
                term *= host[ha[a], hb[b]] ** k
            total += term
    return total


def brute_emb(pattern: BipartitePattern, host: WeightedHost, cap: int = BRUTE_CAP) -> Fraction:
    """Sum over injective bipartition-respecting maps of the edge-weight product."""
    _check(pattern, cap)
    total = Fraction(0)
    for ha in permutations(range(host.n), pattern.left_size):
        for hb in permutations(range(host.m), pattern.right_size):
            term = Fraction(1)
            for a, b, k in pattern.edges:
                term *= host[ha[a], hb[b]] ** k
                if term == 0:
                    break
            total += term
    return total


def brute_sub(pattern: BipartitePattern, host: WeightedHost, cap: int = BRUTE_CAP) -> Fraction:
    return brute_emb(pattern, host, cap) / automorphism_count(pattern)


def embedding_masks(pattern: BipartitePattern, n: int, m: int) -> dict[int, int]:
    """Count of injections per image edge set, edges of the n x m grid encoded as bit i*m+j."""
    counts: dict[int, int] = defaultdict(int)
    edges = pattern.simple_edges()
    for ha in permutations(range(n), pattern.left_size):
        for hb in permutations(range(m), pattern.right_size):
            mask = 0
            for a, b in edges:
                mask |= 1 << (ha[a] * m + hb[b])
            counts[mask] += 1
    return dict(counts)


def superset_sum_table(weights: Mapping[int, int | Fraction], bits: int) -> np.ndarray:
    """table[G] = sum of weights[S] over S subset of G, for every G in 0..2^bits-1 (object dtype)."""
    table = np.zeros(1 << bits, dtype=object)
    table[:] = 0
    for s, w in weights.items():
        table[s] += w
    idx = np.arange(1 << bits)
    for bit in range(bits):
        has = (idx >> bit) & 1 == 1
        table[has] = table[has] + table[idx[has] ^ (1 << bit)]
    return table


def brute_sub_all_01(pattern: BipartitePattern, n: int, m: int) -> np.ndarray:
    """sub_F at every 0/1 host, indexed by the edge bitmask of the host."""
    table = superset_sum_table(embedding_masks(pattern, n, m), n * m)
    aut = automorphism_count(pattern)
    return np.array([Fraction(int(v), aut) for v in table], dtype=object)


def brute_immanant_from_chars(chi, matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """sum_pi chi(pi) prod_i M[i][pi(i)] for a callable chi on permutations."""
    n = len(matrix)
    total = Fraction(0)
    for pi in permutations(range(n)):
        term = Fraction(1)
        for i in range(n):
            term *= matrix[i][pi[i]]
            if term == 0:
                break
        if term:
            total += chi(pi) * term
    return total


# --------------------------------------------------------------------------- sparse polynomials


class SparsePolynomial:
    """Exact multivariate polynomial: monomial (sorted (var, exp) pairs) -> nonzero rational."""

    __slots__ = ("terms", "names")

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None, names: Sequence[str] | None = None):
        self.terms: dict[Monomial, Fraction] = {k: Fraction(v) for k, v in (terms or {}).items() if v != 0}
        self.names = tuple(names) if names is not None else None

    @classmethod
    def constant(cls, value: Fraction | int) -> "SparsePolynomial":
        return cls({(): Fraction(value)})

    @classmethod
    def variable(cls, index: int) -> "SparsePolynomial":
        return cls({((index, 1),): Fraction(1)})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparsePolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "SparsePolynomial") -> "SparsePolynomial":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return SparsePolynomial(out)

    def __sub__(self, other: "SparsePolynomial") -> "SparsePolynomial":
        return self + other.scaled(-1)

    def scaled(self, c: Fraction | int) -> "SparsePolynomial":
        return SparsePolynomial({k: v * c for k, v in self.terms.items()})

    def __mul__(self, other: "SparsePolynomial") -> "SparsePolynomial":
        out: dict[Monomial, Fraction] = defaultdict(Fraction)
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                out[_mono_mul(k1, k2)] += v1 * v2
        if len(out) > EXPANSION_CAP:
            raise CapExceeded("polynomial expansion exceeds the monomial cap")
        return SparsePolynomial(out)

    def __pow__(self, e: int) -> "SparsePolynomial":
        result = SparsePolynomial.constant(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def total_degree(self) -> int:
        return max((sum(e for _, e in k) for k in self.terms), default=0)

    def evaluate(self, values: Mapping[int, Fraction] | Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for mono, c in self.terms.items():
            term = c
            for var, e in mono:
                term *= Fraction(values[var]) ** e
            total += term
        return total

    def lines(self, width: int) -> list[str]:
        """Golden-file form: dense exponent vector and coefficient, sorted."""
        out = []
        for mono, c in self.terms.items():
            vec = [0] * width
            for var, e in mono:
                vec[var] = e
            out.append((vec, c))
        out.sort()
        return [" ".join(map(str, v)) + f" : {c.numerator}/{c.denominator}" for v, c in out]

    def __repr__(self) -> str:
        return f"SparsePolynomial({len(self.terms)} terms)"


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for var, e in b:
        d[var] = d.get(var, 0) + e
    return tuple(sorted(d.items()))


def variable_index(n: int, m: int, i: int, j: int) -> int:
    """Row-major index of x_ij."""
    return i * m + j


def expand_circuit(circuit: Circuit, cap: int = EXPANSION_CAP, var_order: Sequence[str] = ()) -> SparsePolynomial:
    """Exact expansion; x_ij is variable i*m+j, VAR gates follow in ``var_order`` (or sorted) order."""
    width = circuit.n * circuit.m
    names = list(var_order) or sorted(circuit.var_names())
    var_pos = {name: width + i for i, name in enumerate(names)}
    polys: list[SparsePolynomial] = []
    for kind, data in circuit.gates:
        if kind == IN:
            i, j = data  # type: ignore[misc]
            polys.append(SparsePolynomial.variable(variable_index(circuit.n, circuit.m, i, j)))
        elif kind == CONST:
            polys.append(SparsePolynomial.constant(data))  # type: ignore[arg-type]
        elif kind == VAR:
            polys.append(SparsePolynomial.variable(var_pos[data]))  # type: ignore[index]
        elif kind == ADD:
            acc: dict[Monomial, Fraction] = defaultdict(Fraction)
            for c, k in data:  # type: ignore[union-attr]
                for mono, v in polys[c].terms.items():
                    acc[mono] += v * k
            polys.append(SparsePolynomial(acc))
        else:
            acc_p = SparsePolynomial.constant(1)
            for c, k in data:  # type: ignore[union-attr]
                acc_p = acc_p * (polys[c] ** k)
            polys.append(acc_p)
        if len(polys[-1]) > cap:
            raise CapExceeded(f"expansion exceeds {cap} monomials")
    return polys[circuit.out]


def multilinearize(p: SparsePolynomial) -> SparsePolynomial:
    """Clip every exponent to 1 and merge equal monomials."""
    out: dict[Monomial, Fraction] = defaultdict(Fraction)
    for mono, c in p.terms.items():
        out[tuple((v, 1) for v, _ in mono)] += c
    return SparsePolynomial(out)


def polynomial_from_pattern(pattern: BipartitePattern, n: int, m: int, injective: bool) -> SparsePolynomial:
    """hom (all maps) or emb (injective maps) polynomial, built monomial by monomial."""
    acc: dict[Monomial, Fraction] = defaultdict(Fraction)
    maps_a = permutations(range(n), pattern.left_size) if injective else product(range(n), repeat=pattern.left_size)
    maps_a = list(maps_a)
    maps_b = list(
        permutations(range(m), pattern.right_size) if injective else product(range(m), repeat=pattern.right_size)
    )
    for ha in maps_a:
        for hb in maps_b:
            d: dict[int, int] = defaultdict(int)
            for a, b, k in pattern.edges:
                d[variable_index(n, m, ha[a], hb[b])] += k
            acc[tuple(sorted(d.items()))] += 1
    return SparsePolynomial(acc)


def sub_polynomial(pattern: BipartitePattern, n: int, m: int) -> SparsePolynomial:
    return polynomial_from_pattern(pattern, n, m, injective=True).scaled(Fraction(1, automorphism_count(pattern)))


def all_01_values(p: SparsePolynomial, bits: int) -> np.ndarray:
    """Values of p at every 0/1 point of ``bits`` variables (index = bitmask), via superset sums."""
    ml = multilinearize(p)
    weights: dict[int, Fraction] = defaultdict(Fraction)
    for mono, c in ml.terms.items():
        mask = 0
        for v, _ in mono:
            if v >= bits:
                raise ValueError("polynomial has variables beyond the host grid")
            mask |= 1 << v
        weights[mask] += c
    den = lcm(*(c.denominator for c in weights.values())) if weights else 1
    table = superset_sum_table({k: int(v * den) for k, v in weights.items()}, bits)
    return np.array([Fraction(int(v), den) for v in table], dtype=object)


# --------------------------------------------------------------------------- identity testing


def circuits_equal(
    c1: Circuit,
    c2: Circuit,
    trials: int = 20,
    mode: str = "auto",
    seed: int = 0,
    cap: int = 20_000,
) -> str:
    """'equal' / 'different' from exact expansion, or 'indistinguishable (probabilistic)' from sampling.

    ``auto`` tries exact expansion under ``cap`` monomials and falls back to sampling
    integer points from [0, 2^61).
    """
    if (c1.n, c1.m) != (c2.n, c2.m):
        raise ValueError("circuits have different host dimensions")
    if mode in ("auto", "exact"):
        try:
            same = expand_circuit(c1, cap) == expand_circuit(c2, cap)
            return "equal" if same else "different"
        except CapExceeded:
            if mode == "exact":
                raise
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = random.Random(seed)
    for _ in range(trials):
        host = WeightedHost.from_rows([[rng.randrange(2**61) for _ in range(c1.m)] for _ in range(c1.n)])
        if evaluate(c1, host) != evaluate(c2, host):
            return "different"
    return "indistinguishable (probabilistic)"


def schwartz_zippel_note(circuit: Circuit, trials: int) -> str:
    d = degree(circuit)
    return f"degree <= {d}; false agreement probability <= ({d}/2^61)^{trials}"


# --------------------------------------------------------------------------- edge-class polynomials


def symbolic_sub_by_edge_classes(
    pattern: BipartitePattern, classes: Sequence[Sequence[int]] | Mapping[tuple[int, int], int], n: int, m: int
) -> SparsePolynomial:
    """sub_F with every host pair replaced by its class variable y_c.

    ``classes`` maps each pair (i, j) to a class index, given either as a dict or
    as an n x m matrix of indices. The pattern must be full-size (|A| = n, |B| = m).
    """
    if n > 3 or m > 3:
        raise CapExceeded("edge-class polynomials are capped at n, m <= 3")
    if (pattern.left_size, pattern.right_size) != (n, m):
        raise ValueError("pattern must have exactly n left and m right vertices")
    if isinstance(classes, Mapping):
        cls = {(i, j): classes[(i, j)] for i in range(n) for j in range(m)}
    else:
        cls = {(i, j): classes[i][j] for i in range(n) for j in range(m)}
    acc: dict[Monomial, Fraction] = defaultdict(Fraction)
    for ha in permutations(range(n)):
        for hb in permutations(range(m)):
            d: dict[int, int] = defaultdict(int)
            for a, b, k in pattern.edges:
                d[cls[(ha[a], hb[b])]] += k
            acc[tuple(sorted(d.items()))] += 1
    aut = automorphism_count(pattern)
    return SparsePolynomial({k: v / aut for k, v in acc.items()})


def flip_degrees(p: SparsePolynomial, class_sizes: Mapping[int, int]) -> SparsePolynomial:
    """Substitute exponent e_c -> |C_c| - e_c in every monomial."""
    out: dict[Monomial, Fraction] = {}
    for mono, c in p.terms.items():
        d = dict(mono)
        flipped = tuple(sorted((v, class_sizes[v] - d.get(v, 0)) for v in class_sizes if class_sizes[v] - d.get(v, 0)))
        out[flipped] = c
    return SparsePolynomial(out)
