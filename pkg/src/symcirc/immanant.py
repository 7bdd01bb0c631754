"""Characters of the symmetric group, immanants, a symmetric determinant circuit and the
cycle-tuple interpolation pipeline that expresses immanants through determinants."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from math import comb, factorial, prod
from typing import Iterable, Sequence

import sympy

from .circuit import Builder, Circuit, size
from .partitions import CapExceeded
from .synth import SynthReport, vandermonde_inverse

IMMANANT_N_CAP = 8
B_CAP = 4
COVER_ENUM_CAP = 20_000


@dataclass(frozen=True)
class IntegerPartition:
    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        parts = tuple(self.parts)
        if any(p <= 0 for p in parts) or list(parts) != sorted(parts, reverse=True):
            raise ValueError(f"{parts} is not a weakly decreasing tuple of positive parts")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def parse(cls, text: str) -> "IntegerPartition":
        return cls(tuple(sorted((int(x) for x in text.split(",") if x.strip()), reverse=True)))

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def b(self) -> int:
        """n minus the number of parts."""
        return self.n - len(self.parts)

    def __str__(self) -> str:
        return ",".join(map(str, self.parts))


def integer_partitions(n: int, largest: int | None = None) -> list[tuple[int, ...]]:
    """All partitions of n as weakly decreasing tuples, in reverse lexicographic order."""
    largest = n if largest is None else largest
    if n == 0:
        return [()]
    out = []
    for first in range(min(n, largest), 0, -1):
        for rest in integer_partitions(n - first, first):
            out.append((first,) + rest)
    return out


def cycle_type(perm: Sequence[int]) -> tuple[int, ...]:
    seen = [False] * len(perm)
    lengths = []
    for start in range(len(perm)):
        if not seen[start]:
            length, x = 0, start
            while not seen[x]:
                seen[x] = True
                x = perm[x]
                length += 1
            lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def sign_of_type(ctype: Sequence[int]) -> int:
    return -1 if sum(c - 1 for c in ctype) % 2 else 1


# --------------------------------------------------------------------------- characters


@lru_cache(maxsize=None)
def _mn(beta: frozenset[int], rest: tuple[int, ...]) -> int:
    """Murnaghan-Nakayama on a beta-set: remove rim hooks of the lengths in ``rest``."""
    if not rest:
        return 1
    r, tail = rest[0], rest[1:]
    total = 0
    for x in beta:
        y = x - r
        if y < 0 or y in beta:
            continue
        height = sum(1 for z in beta if y < z < x)
        moved = (beta - {x}) | {y}
        total += (-1) ** height * _mn(frozenset(moved), tail)
    return total


def character_value(lam: Sequence[int] | IntegerPartition, ctype: Sequence[int]) -> int:
    """chi^lambda at the class with cycle type ``ctype``."""
    parts = lam.parts if isinstance(lam, IntegerPartition) else tuple(lam)
    if sum(parts) != sum(ctype):
        raise ValueError(f"partition of {sum(parts)} evaluated at a class of {sum(ctype)}")
    s = len(parts)
    beta = frozenset(p + (s - 1 - i) for i, p in enumerate(parts))
    return _mn(beta, tuple(sorted((c for c in ctype if c > 0), reverse=True)))


def class_size(ctype: Sequence[int]) -> int:
    n = sum(ctype)
    counts = Counter(ctype)
    return factorial(n) // prod(l**k * factorial(k) for l, k in counts.items())


def character_table(n: int) -> tuple[list[tuple[int, ...]], list[list[int]]]:
    parts = integer_partitions(n)
    return parts, [[character_value(lam, mu) for mu in parts] for lam in parts]


def hook_length_dimension(lam: Sequence[int]) -> int:
    """f^lambda by the hook length formula (independent check of chi at the identity)."""
    lam = list(lam)
    n = sum(lam)
    conj = [sum(1 for p in lam if p > j) for j in range(lam[0])] if lam else []
    hooks = prod(lam[i] - j + conj[j] - i - 1 for i in range(len(lam)) for j in range(lam[i]))
    return factorial(n) // hooks


def brute_force_immanant(lam: Sequence[int] | IntegerPartition, matrix: Sequence[Sequence[Fraction | int]]) -> Fraction:
    """sum over Sym_n of chi^lambda(pi) prod_i M[i][pi(i)]."""
    n = len(matrix)
    if n > IMMANANT_N_CAP:
        raise CapExceeded(f"brute-force immanant is capped at n <= {IMMANANT_N_CAP}")
    parts = lam.parts if isinstance(lam, IntegerPartition) else tuple(lam)
    if sum(parts) != n:
        raise ValueError("partition size does not match the matrix")
    total = Fraction(0)
    for pi in permutations(range(n)):
        term = Fraction(1)
        for i in range(n):
            term *= Fraction(matrix[i][pi[i]])
            if term == 0:
                break
        if term:
            total += character_value(parts, cycle_type(pi)) * term
    return total


def brute_force_class_function(f, matrix: Sequence[Sequence[Fraction | int]]) -> Fraction:
    """sum over Sym_n of f(cycle type of pi) prod_i M[i][pi(i)]."""
    n = len(matrix)
    total = Fraction(0)
    for pi in permutations(range(n)):
        term = Fraction(1)
        for i in range(n):
            term *= Fraction(matrix[i][pi[i]])
            if term == 0:
                break
        if term:
            total += f(cycle_type(pi)) * term
    return total


def cofactor_determinant(matrix: Sequence[Sequence[Fraction | int]]) -> Fraction:
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    total = Fraction(0)
    for j in range(n):
        if matrix[0][j]:
            minor = [row[:j] + row[j + 1:] for row in (list(r) for r in matrix[1:])]
            total += (-1) ** j * Fraction(matrix[0][j]) * cofactor_determinant(minor)
    return total


# --------------------------------------------------------------------------- determinant


def determinant_gate(builder: Builder, entries: Sequence[Sequence[int]], keyed: bool = False) -> int:
    """Faddeev-LeVerrier: M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k)/k, det = (-1)^n c_0.

    Traces of matrix powers are invariant under simultaneous row/column
    permutation, so the construction is symmetric gate by gate.
    """
    n = len(entries)
    if n == 0:
        return builder.one
    coeff = builder.one  # c_n
    prev = None
    for k in range(1, n + 1):
        cur = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                terms = []
                if prev is not None:
                    terms = [builder.mul([entries[i][l], prev[l][j]]) for l in range(n)]
                if i == j:
                    terms.append(coeff)
                cur[i][j] = builder.add(terms)
                if keyed and builder.const_value(cur[i][j]) is None:
                    builder.set_key(cur[i][j], f"M{k}", ((0, i), (0, j)))
        trace = builder.add(builder.mul([entries[i][l], cur[l][i]]) for i in range(n) for l in range(n))
        coeff = builder.scale(Fraction(-1, k), trace)
        if keyed and builder.const_value(coeff) is None:
            builder.set_key(coeff, f"c{n - k}", ())
        prev = cur
    return builder.scale((-1) ** n, coeff)


def synth_symmetric_determinant(n: int) -> Circuit:
    """Sym_n-symmetric determinant circuit of size O(n^4)."""
    if n < 1:
        raise ValueError("n must be positive")
    builder = Builder(n, n, "symn")
    entries = [[builder.inp(i, j) for j in range(n)] for i in range(n)]
    out = determinant_gate(builder, entries, keyed=True)
    if builder.const_value(out) is None:
        builder.set_key(out, "det", ())
    return builder.build(out)


# --------------------------------------------------------------------------- cycle tuples


Cycle = tuple[int, ...]  # rotation starting at its smallest vertex


def directed_cycles(n: int, length: int) -> list[Cycle]:
    """All directed cycles of a given length on [n]; length-1 cycles are self-loops."""
    out = []
    for seq in permutations(range(n), length):
        if seq[0] == min(seq):
            out.append(seq)
    return out


def cycle_edges(c: Cycle) -> list[tuple[int, int]]:
    return [(c[i], c[(i + 1) % len(c)]) for i in range(len(c))]


@dataclass(frozen=True)
class CycleTupleFamily:
    index: tuple[int, ...]
    tuples: tuple[tuple[Cycle, ...], ...]

    def slot_lengths(self) -> list[int]:
        return [l + 1 for l, count in enumerate(self.index) for _ in range(count)]

    def bound(self, n: int) -> int:
        return prod((factorial(n) // factorial(n - l)) ** i for l, i in enumerate(self.index, 1) if l <= n)


def enumerate_cycle_covers(n: int, index: Sequence[int], cap: int = COVER_ENUM_CAP) -> CycleTupleFamily:
    """Ordered tuples with index[l-1] cycles of length l whose edge union is a partial cycle cover.

    Slots may repeat a cycle; distinct cycles must be vertex-disjoint.
    """
    index = tuple(index)
    lengths = [l + 1 for l, count in enumerate(index) for _ in range(count)]
    if any(l > n for l in lengths):
        return CycleTupleFamily(index, ())
    fam = CycleTupleFamily(index, ())
    if fam.bound(n) > cap * 50:
        raise CapExceeded(f"cycle tuple enumeration bound {fam.bound(n)} exceeds the cap")
    pools = {l: directed_cycles(n, l) for l in set(lengths)}
    out: list[tuple[Cycle, ...]] = []

    def grow(prefix: list[Cycle], used: set[int]) -> None:
        if len(prefix) == len(lengths):
            out.append(tuple(prefix))
            if len(out) > cap:
                raise CapExceeded(f"more than {cap} cycle tuples")
            return
        for c in pools[lengths[len(prefix)]]:
            if c in prefix:
                grow(prefix + [c], used)
            elif not used.intersection(c):
                grow(prefix + [c], used | set(c))

    grow([], set())
    return CycleTupleFamily(index, tuple(out))


# --------------------------------------------------------------------------- f_I immanants


def f_index_value(index: Sequence[int], ctype: Sequence[int]) -> int:
    """f_I(pi) = sgn(pi) * prod_l alpha_l(pi)^{i_l}."""
    counts = Counter(ctype)
    return sign_of_type(ctype) * prod(counts.get(l, 0) ** i for l, i in enumerate(index, 1))


def imm_f_index_gate(builder: Builder, index: Sequence[int], n: int, cap: int = COVER_ENUM_CAP) -> int:
    """Coefficient of prod (t_slot)^{len(slot)} in sum over cycle tuples of det A(tuple).

    Every t_slot has degree at most its cycle length, so it is sampled at 0..len;
    determinant subcircuits are shared between scaled matrices with equal entries.
    """
    family = enumerate_cycle_covers(n, index, cap)
    lengths = family.slot_lengths()
    x = [[builder.inp(i, j) for j in range(n)] for i in range(n)]
    rows = [vandermonde_inverse(tuple(Fraction(p) for p in range(l + 1)))[l] for l in lengths]
    det_memo: dict[tuple, int] = {}
    acc: dict[int, Fraction] = {}
    grid = list(product(*(range(l + 1) for l in lengths)))
    weights = [prod((row[p] for row, p in zip(rows, point)), start=Fraction(1)) for point in grid]
    for tup in family.tuples:
        slot_edges = [set(cycle_edges(c)) for c in tup]
        for point, weight in zip(grid, weights):
            if weight == 0:
                continue
            scale: dict[tuple[int, int], int] = {}
            for edges, value in zip(slot_edges, point):
                for e in edges:
                    scale[e] = scale.get(e, 1) * value
            entries = tuple(
                tuple(x[i][j] if (i, j) not in scale else builder.scale(scale[(i, j)], x[i][j]) for j in range(n))
                for i in range(n)
            )
            gid = det_memo.get(entries)
            if gid is None:
                gid = determinant_gate(builder, entries)
                det_memo[entries] = gid
            acc[gid] = acc.get(gid, Fraction(0)) + weight
    return builder.linear_combination((c, g) for g, c in acc.items())


def synth_imm_fI(index: Sequence[int], n: int) -> Circuit:
    builder = Builder(n, n, "symn")
    out = imm_f_index_gate(builder, index, n)
    if builder.const_value(out) is None:
        builder.set_key(out, "immf", ())
    return builder.build(out)


# --------------------------------------------------------------------------- immanants


def _compositions_bounded(m: int, low: int, high: int) -> list[tuple[int, ...]]:
    """All (k_1..k_m) with low <= sum l*k_l <= high."""
    out = []

    def grow(prefix: list[int], total: int) -> None:
        l = len(prefix) + 1
        if l > m:
            if low <= total <= high:
                out.append(tuple(prefix))
            return
        k = 0
        while total + l * k <= high:
            grow(prefix + [k], total + l * k)
            k += 1

    grow([], 0)
    return out


def binomial_monomials(ks: Sequence[int]) -> dict[tuple[int, ...], Fraction]:
    """Expansion of prod_l binom(alpha_l, k_l) as {exponent tuple: coefficient}."""
    alphas = sympy.symbols(f"a1:{len(ks) + 1}") if ks else ()
    expr = sympy.Integer(1)
    for a, k in zip(alphas, ks):
        expr *= sympy.expand_func(sympy.binomial(a, k))
    poly = sympy.Poly(sympy.expand(expr), *alphas) if ks else None
    if poly is None:
        return {(): Fraction(1)}
    return {
        tuple(e): Fraction(int(c.p), int(c.q)) for e, c in zip(poly.monoms(), poly.coeffs())
    }


@dataclass
class Calibration:
    index_set: list[tuple[int, ...]]
    chi: dict[tuple[int, ...], Fraction]
    free_parameters: int
    consistent: bool


def calibrate(lam: IntegerPartition) -> Calibration:
    """Solve chi^lambda(mu) = sgn(mu) sum_k chi(k) prod_l binom(alpha_l(mu), k_l) over all classes mu.

    Free parameters of an underdetermined system are set to 0; an inconsistent system is reported.
    """
    n, m = lam.n, lam.b
    r = lam.parts[0]
    index_set = _compositions_bounded(m, max(m - r + 1, 0), m)
    classes = integer_partitions(n)
    rows, rhs = [], []
    for mu in classes:
        counts = Counter(mu)
        sgn = sign_of_type(mu)
        rows.append([sgn * prod(comb(counts.get(l, 0), k) for l, k in enumerate(ks, 1)) for ks in index_set])
        rhs.append(character_value(lam.parts, mu))
    a = sympy.Matrix(rows)
    b = sympy.Matrix(rhs)
    try:
        sol, params = a.gauss_jordan_solve(b)
    except ValueError:
        return Calibration(index_set, {}, 0, False)
    sol = sol.subs({p: 0 for p in params})
    chi = {ks: Fraction(int(sympy.nsimplify(v).p), int(sympy.nsimplify(v).q)) for ks, v in zip(index_set, sol)}
    consistent = list(a * sol) == list(b)
    return Calibration(index_set, chi, len(params), consistent)


def immanant_terms(lam: IntegerPartition) -> dict[tuple[int, ...], Fraction]:
    """imm_lambda = sum_I coeff_I imm_{f_I}, grouping the binomial expansion by I."""
    cal = calibrate(lam)
    if not cal.consistent:
        raise ArithmeticError(f"no class-function coefficients reproduce chi^{lam}")
    out: dict[tuple[int, ...], Fraction] = {}
    for ks, c in cal.chi.items():
        if c == 0:
            continue
        for exps, coeff in binomial_monomials(ks).items():
            key = tuple(exps)
            while key and key[-1] == 0:
                key = key[:-1]
            out[key] = out.get(key, Fraction(0)) + c * coeff
    return {k: v for k, v in out.items() if v != 0}


def synth_immanant(lam: IntegerPartition | Sequence[int], b_cap: int = B_CAP, n_cap: int = IMMANANT_N_CAP) -> SynthReport:
    """Sym_n-symmetric immanant circuit assembled from f_I circuits."""
    if not isinstance(lam, IntegerPartition):
        lam = IntegerPartition(tuple(lam))
    if lam.b > b_cap:
        raise CapExceeded(f"b(lambda) = {lam.b} exceeds the cap {b_cap}")
    if lam.n > n_cap:
        raise CapExceeded(f"n = {lam.n} exceeds the cap {n_cap}")
    n = lam.n
    terms = immanant_terms(lam)
    builder = Builder(n, n, "symn")
    parts = [(c, imm_f_index_gate(builder, index, n)) for index, c in sorted(terms.items())]
    out = builder.linear_combination(parts)
    if builder.const_value(out) is None:
        builder.set_key(out, "imm", ())
    circuit = builder.build(out)
    return SynthReport(
        circuit,
        size(circuit),
        None,
        0,
        True,
        {
            "lambda": list(lam.parts),
            "b": lam.b,
            "f_terms": {",".join(map(str, k)) or "()": f"{v.numerator}/{v.denominator}" for k, v in terms.items()},
            "loops_as_fixed_points": True,
        },
    )


def immanant_bound_estimate(n: int, s: int) -> int:
    """n^{6(n-s)+4} (n-s)^{n-s}, reported and never asserted."""
    return n ** (6 * (n - s) + 4) * (n - s) ** (n - s)
