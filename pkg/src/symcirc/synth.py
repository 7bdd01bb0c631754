"""Circuit synthesis: homomorphism circuits from tree decompositions, subgraph circuits by Möbius
inversion and by vertex-cover interpolation, biclique circuits, and coefficient extraction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations, product
from math import factorial, prod
from typing import Sequence

import sympy

from .circuit import Builder, Circuit, degree, key_support_length, size
from .graphs import (
    LEFT,
    RIGHT,
    BipartitePattern,
    automorphism_count,
    bipartite_complement,
    minimum_vertex_cover,
    pattern_key,
)
from .partitions import PARTITION_CAP, CapExceeded, enumerate_partitions, moebius
from .treedec import TreeDecomposition, cached_treewidth, is_conforming, nice_decomposition

COVER_CAP = 4


@dataclass
class SynthReport:
    circuit: Circuit
    size: int
    bound: int | None
    max_sup: int
    conforming: bool
    stats: dict = field(default_factory=dict)

    @property
    def within_bound(self) -> bool | None:
        return None if self.bound is None else self.size <= self.bound

    def to_json(self) -> str:
        return json.dumps(
            {
                "size": self.size,
                "bound": self.bound,
                "within_bound": self.within_bound,
                "max_sup": self.max_sup,
                "conforming": self.conforming,
                "gates": len(self.circuit.gates),
                "stats": self.stats,
            },
            sort_keys=True,
        )


def hom_size_bound(k: int, n: int, m: int, norm: int) -> int:
    """5 * k!^2 * k * (n+m)^(k+1) * ||F||^2."""
    return 5 * factorial(k) ** 2 * k * (n + m) ** (k + 1) * norm**2


def _report(builder: Builder, out: int, bound: int | None, conforming: bool, **stats) -> SynthReport:
    circuit = builder.build(out)
    return SynthReport(circuit, size(circuit), bound, key_support_length(circuit), conforming, dict(stats))


# --------------------------------------------------------------------------- homomorphisms


def hom_gate(
    builder: Builder, pattern: BipartitePattern, td: TreeDecomposition, prefix: str = ""
) -> int:
    """Emit the homomorphism polynomial of ``pattern`` into ``builder`` using decomposition ``td``.

    F^s(tau) multiplies the edges whose topmost bag is s with K^t over children t;
    K^t sums F^t over the vertices of t missing from its parent. Keys are
    ``F<s>``/``K<t>`` with the host tuple of the bag (or bag intersection) as support.
    """
    n, m = builder.n, builder.m
    if pattern.num_vertices == 0:
        return builder.one
    kids = td.children()
    bag_order = [tuple(sorted(b)) for b in td.bags]
    depth = {td.root: 0}
    for s in td.preorder():
        for t in kids[s]:
            depth[t] = depth[s] + 1
    local: list[list[tuple[int, int, int, int]]] = [[] for _ in td.bags]
    for a, b, mult in pattern.edges:
        u, v = (LEFT, a), (RIGHT, b)
        home = min((s for s, bag in enumerate(td.bags) if u in bag and v in bag), key=depth.__getitem__)
        pos = {x: i for i, x in enumerate(bag_order[home])}
        local[home].append((pos[u], pos[v], mult, 0))

    def host_range(vertex) -> range:
        return range(n) if vertex[0] == LEFT else range(m)

    def support(verts, values) -> tuple:
        return tuple((side, val) for (side, _), val in zip(verts, values))

    f_memo: dict[tuple[int, tuple[int, ...]], int] = {}
    k_memo: dict[tuple[int, tuple[int, ...]], int] = {}

    def f_gate(s: int, values: tuple[int, ...]) -> int:
        got = f_memo.get((s, values))
        if got is not None:
            return got
        verts = bag_order[s]
        factors: list[tuple[int, int]] = [
            (builder.inp(values[pa], values[pb]), mult) for pa, pb, mult, _ in local[s]
        ]
        assign = dict(zip(verts, values))
        for t in kids[s]:
            shared = tuple(x for x in bag_order[t] if x in td.bags[s])
            factors.append((k_gate(t, shared, tuple(assign[x] for x in shared)), 1))
        gid = builder.mul(factors)
        if builder.const_value(gid) is None:
            builder.set_key(gid, f"{prefix}F{s}", support(verts, values))
        f_memo[(s, values)] = gid
        return gid

    def k_gate(t: int, shared: tuple, values: tuple[int, ...]) -> int:
        got = k_memo.get((t, values))
        if got is not None:
            return got
        verts = bag_order[t]
        fresh = [x for x in verts if x not in shared]
        fixed = dict(zip(shared, values))
        terms = []
        for choice in product(*(host_range(x) for x in fresh)):
            full = dict(fixed)
            full.update(zip(fresh, choice))
            terms.append(f_gate(t, tuple(full[x] for x in verts)))
        gid = builder.add(terms)
        if builder.const_value(gid) is None:
            builder.set_key(gid, f"{prefix}K{t}", support(shared, values))
        k_memo[(t, values)] = gid
        return gid

    root_verts = bag_order[td.root]
    terms = [f_gate(td.root, vals) for vals in product(*(host_range(x) for x in root_verts))]
    return builder.add(terms)


def synth_hom(pattern: BipartitePattern, td: TreeDecomposition | None, n: int, m: int) -> SynthReport:
    """Symmetric circuit for hom_{F,n,m}; ``td`` is normalised first (computed exactly if omitted)."""
    if td is None:
        td = cached_treewidth(pattern)[1]
    nice = nice_decomposition(pattern, td)
    k = nice.width + 1
    conforming = nice.num_nodes == 1 or is_conforming(nice, k)
    builder = Builder(n, m)
    out = hom_gate(builder, pattern, nice, "")
    if builder.const_value(out) is None:
        builder.set_key(out, "hom", ())
    bound = hom_size_bound(max(k, 1), n, m, pattern.norm)
    return _report(builder, out, bound, conforming, k=k, bags=nice.num_nodes)


# --------------------------------------------------------------------------- subgraphs by Möbius inversion


def sub_moebius_terms(pattern: BipartitePattern) -> list[tuple[Fraction, BipartitePattern]]:
    """(coefficient, quotient) pairs with sub_F = sum coeff * hom_quotient; isomorphic quotients merged."""
    if pattern.num_vertices > PARTITION_CAP:
        raise CapExceeded(f"pattern has {pattern.num_vertices} vertices, partition cap is {PARTITION_CAP}")
    aut = automorphism_count(pattern)
    merged: dict[tuple, list] = {}
    order: list[tuple] = []
    for pl in enumerate_partitions(pattern.left_size):
        for pr in enumerate_partitions(pattern.right_size):
            q = pattern.quotient(pl, pr)
            key = pattern_key(q)
            if key is None:
                key = ("raw", q)
            if key not in merged:
                merged[key] = [Fraction(0), q]
                order.append(key)
            merged[key][0] += Fraction(moebius(pl) * moebius(pr), aut)
    return [(merged[k][0], merged[k][1]) for k in order if merged[k][0] != 0]


def synth_sub_moebius(pattern: BipartitePattern, n: int, m: int) -> SynthReport:
    """sub_F = (1/|Aut F|) sum_{pi, sigma} mu_pi mu_sigma hom_{F/(pi, sigma)} as one circuit."""
    terms = sub_moebius_terms(pattern)
    builder = Builder(n, m)
    parts = []
    max_k = 0
    for idx, (coeff, q) in enumerate(terms):
        tw, td = cached_treewidth(q)
        nice = nice_decomposition(q, td)
        max_k = max(max_k, nice.width + 1)
        parts.append((coeff, hom_gate(builder, q, nice, prefix=f"q{idx}.")))
    out = builder.linear_combination(parts)
    if builder.const_value(out) is None:
        builder.set_key(out, "sub", ())
    return _report(builder, out, None, True, quotients=len(terms), k=max_k)


# --------------------------------------------------------------------------- interpolation


@lru_cache(maxsize=None)
def vandermonde_inverse(points: tuple[Fraction, ...]) -> tuple[tuple[Fraction, ...], ...]:
    """Rows e of W^{-1} where W[p][e] = points[p]^e, so coeff_e = sum_p W^{-1}[e][p] value_p."""
    if len(set(points)) != len(points):
        raise ValueError("interpolation points must be pairwise distinct")
    w = sympy.Matrix([[sympy.Rational(p.numerator, p.denominator) ** e for e in range(len(points))] for p in points])
    inv = w.inv()
    return tuple(
        tuple(Fraction(int(inv[e, p].p), int(inv[e, p].q)) for p in range(len(points))) for e in range(len(points))
    )


def extract_coefficient(
    circuit: Circuit,
    interp_vars: Sequence[str],
    target_degrees: Sequence[int],
    degree_bounds: Sequence[int] | int | None = None,
    builder: Builder | None = None,
) -> Circuit | int:
    """Circuit for the coefficient of prod t_v^{e_v} in ``circuit`` viewed as a polynomial in the VAR gates.

    Each variable is sampled at 0..d_v; copies of the circuit with constants substituted are
    combined with products of Vandermonde-inverse rows. Passing ``builder`` emits into it and
    returns the gate id instead of a circuit.
    """
    interp_vars = list(interp_vars)
    if len(set(interp_vars)) != len(interp_vars):
        raise ValueError("interpolation variables repeat")
    present = set(circuit.var_names())
    missing = [v for v in interp_vars if v not in present]
    if degree_bounds is None:
        bound = degree(circuit)
        bounds = [bound] * len(interp_vars)
    elif isinstance(degree_bounds, int):
        bounds = [degree_bounds] * len(interp_vars)
    else:
        bounds = list(degree_bounds)
    if len(target_degrees) != len(interp_vars) or len(bounds) != len(interp_vars):
        raise ValueError("one target degree and one degree bound per interpolation variable")
    for e, d in zip(target_degrees, bounds):
        if not 0 <= e:
            raise ValueError("negative target degree")
    own = builder is None
    if own:
        builder = Builder(circuit.n, circuit.m, circuit.group)
    assert builder is not None
    if any(e > d for e, d in zip(target_degrees, bounds)):
        zero = builder.zero
        return builder.build(zero) if own else zero
    for v, e in zip(interp_vars, target_degrees):
        if v in missing and e != 0:
            zero = builder.zero
            return builder.build(zero) if own else zero
    rows = [vandermonde_inverse(tuple(Fraction(p) for p in range(d + 1)))[e] for e, d in zip(target_degrees, bounds)]
    terms = []
    for idx, point in enumerate(product(*(range(d + 1) for d in bounds))):
        weight = prod((row[p] for row, p in zip(rows, point)), start=Fraction(1))
        if weight == 0:
            continue
        subst = {v: builder.const(p) for v, p in zip(interp_vars, point)}
        gid = builder.import_circuit(circuit, subst, key_suffix=f"@{idx}")
        terms.append((weight, gid))
    out = builder.linear_combination(terms)
    return builder.build(out) if own else out


# --------------------------------------------------------------------------- subgraphs by cover interpolation


@dataclass(frozen=True)
class CoverPlan:
    complement: bool
    cover_left: tuple[int, ...]
    cover_right: tuple[int, ...]
    padded: BipartitePattern
    cc: int


def cover_plan(pattern: BipartitePattern, n: int, m: int) -> CoverPlan:
    """Pick the logical cover: the smaller of vc(F') and vc(complement F'); ties go to F' itself."""
    padded = pattern.padded(n, m)
    ca, cb = minimum_vertex_cover(padded)
    comp = bipartite_complement(padded)
    da, db = minimum_vertex_cover(comp)
    if len(da) + len(db) < len(ca) + len(cb):
        return CoverPlan(True, tuple(da), tuple(db), padded, len(da) + len(db))
    return CoverPlan(False, tuple(ca), tuple(cb), padded, len(ca) + len(cb))


def synth_sub_cover(pattern: BipartitePattern, n: int, m: int, cap: int = COVER_CAP) -> SynthReport:
    """sub_{F,n,m} via a logical vertex cover K and interpolation over neighbourhood-type variables."""
    if not pattern.is_simple():
        raise ValueError("cover interpolation needs a simple pattern")
    builder = Builder(n, m)
    if pattern.left_size > n or pattern.right_size > m:
        return _report(builder, builder.zero, None, True, cc=0, note="pattern does not fit")
    plan = cover_plan(pattern, n, m)
    if plan.cc > cap:
        raise CapExceeded(f"logical cover number {plan.cc} exceeds the cap {cap}")
    padded = plan.padded
    adj = padded.adjacency()
    ka, kb = plan.cover_left, plan.cover_right
    cover = {(LEFT, a) for a in ka} | {(RIGHT, b) for b in kb}

    # type of a non-cover vertex: its neighbourhood in the cover, as indices into ka / kb
    a_type_count: dict[tuple[int, ...], int] = {}
    b_type_count: dict[tuple[int, ...], int] = {}
    for b in range(m):
        if (RIGHT, b) in cover:
            continue
        s = tuple(i for i, a in enumerate(ka) if (LEFT, a) in adj[(RIGHT, b)])
        a_type_count[s] = a_type_count.get(s, 0) + 1
    for a in range(n):
        if (LEFT, a) in cover:
            continue
        s = tuple(i for i, b in enumerate(kb) if (RIGHT, b) in adj[(LEFT, a)])
        b_type_count[s] = b_type_count.get(s, 0) + 1
    a_types = sorted(a_type_count)
    b_types = sorted(b_type_count)

    def var_name(side: str, s: tuple[int, ...]) -> str:
        return f"t{side}[{','.join(map(str, s))}]"

    # one type per side is pinned to 1 (fixed total degree); absent types are simply not offered
    interp: list[tuple[str, int, int]] = []
    pinned = {}
    for side, types, counts, total in (("A", a_types, a_type_count, m - len(kb)), ("B", b_types, b_type_count, n - len(ka))):
        for i, s in enumerate(types):
            if i == 0:
                pinned[(side, s)] = True
            else:
                interp.append((var_name(side, s), counts[s], total))
    t_gate = {}
    for side, types in (("A", a_types), ("B", b_types)):
        for i, s in enumerate(types):
            t_gate[(side, s)] = builder.one if i == 0 else builder.var(var_name(side, s))

    cover_edges = [(a, b) for a, b in padded.simple_edges() if a in ka and b in kb]
    q_terms = []
    for img_a in permutations(range(n), len(ka)):
        for img_b in permutations(range(m), len(kb)):
            iota_a = dict(zip(ka, img_a))
            iota_b = dict(zip(kb, img_b))
            factors = [builder.inp(iota_a[a], iota_b[b]) for a, b in cover_edges]
            free_rows = [i for i in range(n) if i not in img_a]
            free_cols = [j for j in range(m) if j not in img_b]
            if plan.complement:
                factors += [builder.inp(i, j) for i in free_rows for j in free_cols]
            for j in free_cols:
                factors.append(
                    builder.add(
                        builder.mul([t_gate[("A", s)]] + [builder.inp(img_a[x], j) for x in s]) for s in a_types
                    )
                )
            for i in free_rows:
                factors.append(
                    builder.add(
                        builder.mul([t_gate[("B", s)]] + [builder.inp(i, img_b[x]) for x in s]) for s in b_types
                    )
                )
            q = builder.mul(factors)
            if builder.const_value(q) is None and builder.gates[q][0] != "VAR":
                builder.set_key(q, "q", tuple((0, i) for i in img_a) + tuple((1, j) for j in img_b))
            q_terms.append(q)
    total = builder.add(q_terms)
    q_circuit = builder.build(total)

    ext = Builder(n, m)
    coeff_gate = extract_coefficient(
        q_circuit,
        [name for name, _, _ in interp],
        [cnt for _, cnt, _ in interp],
        [bound for _, _, bound in interp],
        builder=ext,
    )
    type_orders = prod(factorial(c) for c in a_type_count.values()) * prod(factorial(c) for c in b_type_count.values())
    scale = Fraction(
        type_orders,
        automorphism_count(pattern) * factorial(n - pattern.left_size) * factorial(m - pattern.right_size),
    )
    out = ext.scale(scale, coeff_gate)  # type: ignore[arg-type]
    if ext.const_value(out) is None:
        ext.set_key(out, "sub", ())
    return _report(
        ext,
        out,
        None,
        True,
        cc=plan.cc,
        complement=plan.complement,
        interpolation_vars=len(interp),
        cover_injections=len(q_terms),
    )


# --------------------------------------------------------------------------- bicliques


def synth_biclique(kind: str, k: int, n: int) -> SynthReport:
    """sub_{K_{k,k}} (kind 'k') or sub_{K_{n-k,n-k}} (kind 'n-k') on (n,n) hosts as a sum of products."""
    if kind not in ("k", "n-k"):
        raise ValueError("kind must be 'k' or 'n-k'")
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    builder = Builder(n, n)
    terms = []
    for rows in combinations(range(n), k):
        for cols in combinations(range(n), k):
            if kind == "k":
                r, c = rows, cols
            else:
                r = tuple(i for i in range(n) if i not in rows)
                c = tuple(j for j in range(n) if j not in cols)
            g = builder.mul([builder.inp(i, j) for i in r for j in c])
            if builder.const_value(g) is None and (r or c):
                # the product only depends on the row and column sets, so every ordering is a key
                for rp in permutations(rows):
                    for cp in permutations(cols):
                        builder.set_key(g, "bc", tuple((0, i) for i in rp) + tuple((1, j) for j in cp))
            terms.append(g)
    out = builder.add(terms)
    if builder.const_value(out) is None:
        builder.set_key(out, "sub", ())
    # wires of each product are at most n^2, there are C(n,k)^2 products
    bound = 2 * (n ** (2 * k)) * (n * n + 1) + 1
    return _report(builder, out, bound, True, products=len(terms))
