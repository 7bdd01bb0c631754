"""Bipartite pattern multigraphs, labelled patterns, weighted hosts and structural parameters.

Pattern vertices are pairs ``(side, index)`` with ``side`` 0 for the left part A
and 1 for the right part B. Host vertices are 0-based row/column indices.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations, product
from math import factorial
from typing import Iterable, Iterator, Sequence

from .partitions import SetPartition, enumerate_partitions

LEFT, RIGHT = 0, 1
Vertex = tuple[int, int]
Number = Fraction | int


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``p/q`` or an integer string into an exact rational; floats are rejected."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"expected a p/q string, got {text!r}")
    s = text.strip()
    if any(c in s for c in ".eE"):
        raise ValueError(f"floating point value {text!r} is not an exact rational")
    return Fraction(s)


def format_rational(value: Fraction | int) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


# --------------------------------------------------------------------------- patterns


@dataclass(frozen=True)
class BipartitePattern:
    """A bipartite multigraph with fixed bipartition A (left) and B (right).

    ``edges`` holds ``(a, b, multiplicity)`` triples, merged and sorted.
    """

    left_size: int
    right_size: int
    edges: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.left_size < 0 or self.right_size < 0:
            raise ValueError("negative part size")
        merged: dict[tuple[int, int], int] = {}
        for edge in self.edges:
            if len(edge) == 2:
                a, b, mult = edge[0], edge[1], 1
            else:
                a, b, mult = edge
            if not (0 <= a < self.left_size and 0 <= b < self.right_size):
                raise ValueError(f"edge ({a},{b}) has an endpoint out of range")
            if mult < 1:
                raise ValueError(f"edge ({a},{b}) has multiplicity {mult} < 1")
            merged[(a, b)] = merged.get((a, b), 0) + mult
        object.__setattr__(self, "edges", tuple(sorted((a, b, k) for (a, b), k in merged.items())))

    @classmethod
    def from_edges(cls, left: int, right: int, edges: Iterable[Sequence[int]]) -> "BipartitePattern":
        return cls(left, right, tuple(tuple(e) for e in edges))  # type: ignore[arg-type]

    @classmethod
    def complete(cls, left: int, right: int) -> "BipartitePattern":
        return cls(left, right, tuple((a, b, 1) for a in range(left) for b in range(right)))

    def vertices(self) -> list[Vertex]:
        return [(LEFT, a) for a in range(self.left_size)] + [(RIGHT, b) for b in range(self.right_size)]

    @property
    def num_vertices(self) -> int:
        return self.left_size + self.right_size

    @property
    def num_edges(self) -> int:
        """Edge count with multiplicity."""
        return sum(k for _, _, k in self.edges)

    @property
    def norm(self) -> int:
        """|V| + |E| with edges counted with multiplicity."""
        return self.num_vertices + self.num_edges

    def is_simple(self) -> bool:
        return all(k == 1 for _, _, k in self.edges)

    def simple_edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a, b, _ in self.edges]

    def adjacency(self) -> dict[Vertex, set[Vertex]]:
        """Underlying simple graph as an adjacency map."""
        adj: dict[Vertex, set[Vertex]] = {v: set() for v in self.vertices()}
        for a, b, _ in self.edges:
            adj[(LEFT, a)].add((RIGHT, b))
            adj[(RIGHT, b)].add((LEFT, a))
        return adj

    def degree(self, v: Vertex) -> int:
        side, idx = v
        return sum(k for a, b, k in self.edges if (a if side == LEFT else b) == idx)

    def transpose(self) -> "BipartitePattern":
        return BipartitePattern(self.right_size, self.left_size, tuple((b, a, k) for a, b, k in self.edges))

    def relabel(self, left_perm: Sequence[int], right_perm: Sequence[int]) -> "BipartitePattern":
        return BipartitePattern(
            self.left_size,
            self.right_size,
            tuple((left_perm[a], right_perm[b], k) for a, b, k in self.edges),
        )

    def padded(self, n: int, m: int) -> "BipartitePattern":
        """Add isolated vertices so the parts have sizes n and m."""
        if n < self.left_size or m < self.right_size:
            raise ValueError("cannot pad to a smaller size")
        return BipartitePattern(n, m, self.edges)

    def without_isolated(self) -> tuple["BipartitePattern", int, int]:
        """Drop isolated vertices; returns the reduced pattern and the number removed per side."""
        used_a = sorted({a for a, _, _ in self.edges})
        used_b = sorted({b for _, b, _ in self.edges})
        ia = {a: i for i, a in enumerate(used_a)}
        ib = {b: i for i, b in enumerate(used_b)}
        reduced = BipartitePattern(len(used_a), len(used_b), tuple((ia[a], ib[b], k) for a, b, k in self.edges))
        return reduced, self.left_size - len(used_a), self.right_size - len(used_b)

    def quotient(self, left_part: SetPartition, right_part: SetPartition) -> "BipartitePattern":
        """Identify vertices per block; parallel edges become multiplicity."""
        if left_part.size != self.left_size or right_part.size != self.right_size:
            raise ValueError("partition sizes do not match the pattern")
        la, rb = left_part.block_index(), right_part.block_index()
        return BipartitePattern(len(left_part), len(right_part), tuple((la[a], rb[b], k) for a, b, k in self.edges))

    def quotients(self) -> Iterator[tuple[SetPartition, SetPartition, "BipartitePattern"]]:
        for pl in enumerate_partitions(self.left_size):
            for pr in enumerate_partitions(self.right_size):
                yield pl, pr, self.quotient(pl, pr)

    def __str__(self) -> str:
        body = ", ".join(f"{a}-{b}" + (f"x{k}" if k > 1 else "") for a, b, k in self.edges)
        return f"Pattern({self.left_size}+{self.right_size}: {body})"


@dataclass(frozen=True)
class LabelledPattern:
    """A pattern with label tuples on the left (``left_labels``) and right (``right_labels``) parts.

    ``certificate`` optionally carries a tree decomposition of ``base`` whose root
    bag contains every labelled vertex.
    """

    base: BipartitePattern
    left_labels: tuple[int, ...] = ()
    right_labels: tuple[int, ...] = ()
    certificate: object | None = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "left_labels", tuple(self.left_labels))
        object.__setattr__(self, "right_labels", tuple(self.right_labels))
        for a in self.left_labels:
            if not 0 <= a < self.base.left_size:
                raise ValueError(f"left label {a} is not a left vertex")
        for b in self.right_labels:
            if not 0 <= b < self.base.right_size:
                raise ValueError(f"right label {b} is not a right vertex")

    @property
    def arity(self) -> tuple[int, int]:
        return len(self.left_labels), len(self.right_labels)

    def labelled_vertices(self) -> set[Vertex]:
        return {(LEFT, a) for a in self.left_labels} | {(RIGHT, b) for b in self.right_labels}


# --------------------------------------------------------------------------- hosts


@dataclass(frozen=True)
class WeightedHost:
    """An n x m matrix of exact rationals: an edge-weighted bipartite host graph."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(parse_rational(x) for x in row) for row in self.entries)
        if not rows or not rows[0]:
            raise ValueError("host dimensions must be positive")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged host matrix")
        object.__setattr__(self, "entries", rows)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def m(self) -> int:
        return len(self.entries[0])

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        return self.entries[ij[0]][ij[1]]

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[Number | str]]) -> "WeightedHost":
        return cls(tuple(tuple(parse_rational(x) for x in r) for r in rows))  # type: ignore[arg-type]

    @classmethod
    def constant(cls, n: int, m: int, value: Number = 1) -> "WeightedHost":
        return cls.from_rows([[value] * m for _ in range(n)])

    @classmethod
    def identity(cls, n: int, m: int | None = None) -> "WeightedHost":
        m = n if m is None else m
        return cls.from_rows([[int(i == j) for j in range(m)] for i in range(n)])

    @classmethod
    def from_edges(cls, n: int, m: int, edges: Iterable[tuple[int, int]]) -> "WeightedHost":
        rows = [[0] * m for _ in range(n)]
        for i, j in edges:
            rows[i][j] = 1
        return cls.from_rows(rows)

    @classmethod
    def random(
        cls, rng: random.Random, n: int, m: int, numerators: int = 9, denominators: int = 5
    ) -> "WeightedHost":
        """Random rational entries p/q with |p| <= numerators and 1 <= q <= denominators."""
        return cls.from_rows(
            [
                [Fraction(rng.randint(-numerators, numerators), rng.randint(1, denominators)) for _ in range(m)]
                for _ in range(n)
            ]
        )

    @classmethod
    def random_01(cls, rng: random.Random, n: int, m: int) -> "WeightedHost":
        return cls.from_rows([[rng.randint(0, 1) for _ in range(m)] for _ in range(n)])

    def transpose(self) -> "WeightedHost":
        return WeightedHost(tuple(zip(*self.entries)))

    def permuted(self, row_perm: Sequence[int], col_perm: Sequence[int]) -> "WeightedHost":
        """Host H with H[row_perm[i]][col_perm[j]] = G[i][j]."""
        rows = [[Fraction(0)] * self.m for _ in range(self.n)]
        for i in range(self.n):
            for j in range(self.m):
                rows[row_perm[i]][col_perm[j]] = self.entries[i][j]
        return WeightedHost(tuple(tuple(r) for r in rows))

    def map_values(self, fn) -> "WeightedHost":
        return WeightedHost(tuple(tuple(parse_rational(fn(x)) for x in r) for r in self.entries))

    def is_01(self) -> bool:
        return all(x in (0, 1) for r in self.entries for x in r)


def all_01_hosts(n: int, m: int) -> Iterator[WeightedHost]:
    for bits in product((0, 1), repeat=n * m):
        yield WeightedHost.from_rows([bits[i * m:(i + 1) * m] for i in range(n)])


# --------------------------------------------------------------------------- parameters


def automorphism_count(pattern: BipartitePattern) -> int:
    """Number of bipartition-respecting automorphisms, preserving edge multiplicities."""
    mult = {(a, b): k for a, b, k in pattern.edges}
    deg_a = [pattern.degree((LEFT, a)) for a in range(pattern.left_size)]
    deg_b = [pattern.degree((RIGHT, b)) for b in range(pattern.right_size)]
    count = 0
    for pa in permutations(range(pattern.left_size)):
        if any(deg_a[pa[a]] != deg_a[a] for a in range(pattern.left_size)):
            continue
        for pb in permutations(range(pattern.right_size)):
            if any(deg_b[pb[b]] != deg_b[b] for b in range(pattern.right_size)):
                continue
            if all(mult.get((pa[a], pb[b])) == k for (a, b), k in mult.items()):
                count += 1
    return count


def vertex_cover_number(pattern: BipartitePattern) -> int:
    verts = pattern.vertices()
    edges = pattern.simple_edges()
    for size in range(len(verts) + 1):
        for cover in combinations(verts, size):
            cs = set(cover)
            if all((LEFT, a) in cs or (RIGHT, b) in cs for a, b in edges):
                return size
    raise AssertionError("unreachable")


def minimum_vertex_cover(pattern: BipartitePattern) -> tuple[list[int], list[int]]:
    """A minimum vertex cover as (left vertices, right vertices); ties broken lexicographically."""
    verts = pattern.vertices()
    edges = pattern.simple_edges()
    for size in range(len(verts) + 1):
        for cover in combinations(verts, size):
            cs = set(cover)
            if all((LEFT, a) in cs or (RIGHT, b) in cs for a, b in edges):
                return sorted(i for s, i in cs if s == LEFT), sorted(i for s, i in cs if s == RIGHT)
    raise AssertionError("unreachable")


def matching_number(pattern: BipartitePattern) -> int:
    edges = pattern.simple_edges()
    best = 0

    def extend(start: int, used_a: frozenset[int], used_b: frozenset[int], size: int) -> None:
        nonlocal best
        best = max(best, size)
        for idx in range(start, len(edges)):
            a, b = edges[idx]
            if a not in used_a and b not in used_b:
                extend(idx + 1, used_a | {a}, used_b | {b}, size + 1)

    extend(0, frozenset(), frozenset(), 0)
    return best


def bipartite_complement(pattern: BipartitePattern, n: int | None = None, m: int | None = None) -> BipartitePattern:
    """Complement inside A x B after padding the parts to sizes (n, m)."""
    if not pattern.is_simple():
        raise ValueError("bipartite complement is defined for simple patterns only")
    n = pattern.left_size if n is None else n
    m = pattern.right_size if m is None else m
    if n < pattern.left_size or m < pattern.right_size:
        raise ValueError("complement size is smaller than the pattern")
    present = set(pattern.simple_edges())
    return BipartitePattern(n, m, tuple((a, b, 1) for a in range(n) for b in range(m) if (a, b) not in present))


def logical_cover_number(pattern: BipartitePattern, n: int, m: int) -> int:
    """min(vc(F'), vc(complement of F')) for F padded to (n, m); 0 if F does not fit."""
    if n < pattern.left_size or m < pattern.right_size:
        return 0
    padded = pattern.padded(n, m)
    return min(vertex_cover_number(padded), vertex_cover_number(bipartite_complement(padded)))


def hereditary_treewidth(pattern: BipartitePattern) -> int:
    """Maximum treewidth over all bipartition-respecting quotients."""
    from .treedec import exact_treewidth

    best = -1
    seen: set[tuple] = set()
    for _, _, q in pattern.quotients():
        key = (q.left_size, q.right_size, tuple((a, b) for a, b, _ in q.edges))
        if key in seen:
            continue
        seen.add(key)
        best = max(best, exact_treewidth(q)[0])
    return best


def graph_params(pattern: BipartitePattern, n: int | None = None, m: int | None = None) -> dict[str, int]:
    """Vertex cover number, matching number, hereditary treewidth and (optionally) cc_{n,m}."""
    out = {
        "vc": vertex_cover_number(pattern),
        "mn": matching_number(pattern),
        "hdtw": hereditary_treewidth(pattern),
    }
    if n is not None and m is not None:
        if not pattern.is_simple():
            raise ValueError("logical cover number is defined for simple patterns only")
        out["cc"] = logical_cover_number(pattern, n, m)
    return out


# --------------------------------------------------------------------------- canonical forms


def _refine(colors: dict[Vertex, object], adj: dict[Vertex, dict[Vertex, int]]) -> dict[Vertex, int]:
    """Colour refinement to a stable partition; colours renamed to sorted ranks."""
    current = _rank(colors)
    while True:
        sig = {
            v: (current[v], tuple(sorted((current[u], k) for u, k in adj[v].items())))
            for v in current
        }
        refined = _rank(sig)
        if len(set(refined.values())) == len(set(current.values())):
            return refined
        current = refined


def _rank(colors: dict[Vertex, object]) -> dict[Vertex, int]:
    order = {c: i for i, c in enumerate(sorted(set(colors.values()), key=repr))}
    return {v: order[c] for v, c in colors.items()}


def canonical_key(lp: LabelledPattern, leaf_cap: int = 400) -> tuple | None:
    """Canonical form under bipartition- and label-respecting isomorphism.

    Uses individualisation-refinement, pruning only twin vertices (equal
    neighbourhoods and labels, so swapping them is an automorphism); returns
    ``None`` when the search tree exceeds ``leaf_cap`` leaves.
    """
    return _canonical_key(lp, leaf_cap)


@lru_cache(maxsize=50000)
def _canonical_key(lp: LabelledPattern, leaf_cap: int) -> tuple | None:
    base = lp.base
    verts = base.vertices()
    adj: dict[Vertex, dict[Vertex, int]] = {v: {} for v in verts}
    for a, b, k in base.edges:
        adj[(LEFT, a)][(RIGHT, b)] = k
        adj[(RIGHT, b)][(LEFT, a)] = k
    init: dict[Vertex, object] = {}
    for v in verts:
        side, idx = v
        labels = lp.left_labels if side == LEFT else lp.right_labels
        init[v] = (side, tuple(i for i, x in enumerate(labels) if x == idx))
    twin = {v: (init[v], tuple(sorted(adj[v].items()))) for v in verts}
    leaves = 0
    best: tuple | None = None

    def encode(colors: dict[Vertex, int]) -> tuple:
        order = {v: colors[v] for v in verts}
        e = tuple(sorted((order[(LEFT, a)], order[(RIGHT, b)], k) for a, b, k in base.edges))
        ll = tuple(order[(LEFT, a)] for a in lp.left_labels)
        rl = tuple(order[(RIGHT, b)] for b in lp.right_labels)
        sides = tuple(sorted((order[v], v[0]) for v in verts))
        return (base.left_size, base.right_size, sides, e, ll, rl)

    def search(colors: dict[Vertex, object]) -> bool:
        nonlocal leaves, best
        refined = _refine(colors, adj)
        classes: dict[int, list[Vertex]] = {}
        for v, c in refined.items():
            classes.setdefault(c, []).append(v)
        target = next((c for c in sorted(classes) if len(classes[c]) > 1), None)
        if target is None:
            leaves += 1
            if leaves > leaf_cap:
                return False
            code = encode(refined)
            if best is None or code < best:
                best = code
            return True
        tried = set()
        for v in classes[target]:
            if twin[v] in tried:
                continue
            tried.add(twin[v])
            nxt: dict[Vertex, object] = {u: (c, 0) for u, c in refined.items()}
            nxt[v] = (refined[v], -1)
            if not search(nxt):
                return False
        return True

    if not search(init):
        return None
    return best


def pattern_key(pattern: BipartitePattern, leaf_cap: int = 400) -> tuple | None:
    return canonical_key(LabelledPattern(pattern), leaf_cap)


def enumerate_patterns(max_vertices: int, max_norm: int, simple: bool = False) -> list[BipartitePattern]:
    """One pattern per isomorphism class (sides fixed) with at most ``max_vertices`` vertices
    and total edge multiplicity at most ``max_norm``."""
    top = 1 if simple else max_norm
    seen: dict[tuple, BipartitePattern] = {}
    for left in range(max_vertices + 1):
        for right in range(max_vertices + 1 - left):
            if left + right == 0:
                continue
            slots = [(a, b) for a in range(left) for b in range(right)]

            def grow(i: int, budget: int, cur: list) -> Iterator[tuple]:
                if i == len(slots):
                    yield tuple(cur)
                    return
                for k in range(min(budget, top) + 1):
                    if k:
                        cur.append((*slots[i], k))
                    yield from grow(i + 1, budget - k, cur)
                    if k:
                        cur.pop()

            for edges in grow(0, max_norm, []):
                p = BipartitePattern(left, right, edges)
                key = pattern_key(p)
                if key is None:
                    raise RuntimeError(f"no canonical form found for {p}")
                seen.setdefault((left, right, key), p)
    return list(seen.values())
