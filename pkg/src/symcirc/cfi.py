"""CFI graphs, Weisfeiler-Leman equivalence, oddomorphism search, double covers and
counting-width experiments."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Hashable, Iterable, Iterator, Sequence

import networkx as nx

from .graphs import WeightedHost
from .partitions import CapExceeded
from .treedec import TreeDecomposition, treewidth_of_graph

BRUTE_HOM_CAP = 8
ODDO_CAP = 7
MATCHING_EDGE_CAP = 40


# --------------------------------------------------------------------------- graphs


def _edge(u, v) -> tuple:
    return (u, v) if repr(u) <= repr(v) else (v, u)


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected simple graph with optional sides (0/1), vertex colours and rational edge weights."""

    vertices: tuple
    edges: frozenset = frozenset()
    sides: tuple | None = None
    colors: tuple | None = None
    weights: tuple | None = None

    def __post_init__(self) -> None:
        verts = tuple(self.vertices)
        if len(set(verts)) != len(verts):
            raise ValueError("duplicate vertices")
        vs = set(verts)
        edges = set()
        for e in self.edges:
            u, v = tuple(e)
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            if u not in vs or v not in vs:
                raise ValueError(f"edge {u!r}-{v!r} uses an unknown vertex")
            edges.add(_edge(u, v))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", frozenset(edges))
        if self.sides is not None:
            sides = tuple(self.sides)
            if len(sides) != len(verts):
                raise ValueError("one side per vertex")
            side = dict(zip(verts, sides))
            for u, v in edges:
                if side[u] == side[v]:
                    raise ValueError(f"edge {u!r}-{v!r} lies inside one side")
            object.__setattr__(self, "sides", sides)
        if self.weights is not None:
            w = dict(self.weights)
            if set(w) != edges:
                raise ValueError("weights must be given for exactly the edges")
            object.__setattr__(self, "weights", tuple(sorted(((e, Fraction(x)) for e, x in w.items()), key=repr)))

    @classmethod
    def from_edges(cls, vertices: Iterable, edges: Iterable, sides=None, colors=None, weights=None) -> "SimpleGraph":
        return cls(tuple(vertices), frozenset(_edge(u, v) for u, v in edges), sides, colors, weights)

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "SimpleGraph":
        return cls.from_edges(sorted(g.nodes, key=repr), g.edges)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        for i, v in enumerate(self.vertices):
            attrs = {}
            if self.sides is not None:
                attrs["side"] = self.sides[i]
            if self.colors is not None:
                attrs["color"] = self.colors[i]
            g.add_node(v, **attrs)
        w = self.weight_map()
        for u, v in self.edges:
            g.add_edge(u, v, weight=w.get((u, v), Fraction(1)))
        return g

    @property
    def order(self) -> int:
        return len(self.vertices)

    def weight_map(self) -> dict:
        return dict(self.weights) if self.weights is not None else {}

    def weight(self, u, v) -> Fraction:
        e = _edge(u, v)
        if e not in self.edges:
            return Fraction(0)
        return self.weight_map().get(e, Fraction(1))

    def adjacency(self) -> dict:
        adj: dict = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def side_of(self) -> dict:
        return dict(zip(self.vertices, self.sides)) if self.sides is not None else {}

    def is_connected(self) -> bool:
        return self.order > 0 and nx.is_connected(self.to_networkx())

    def biadjacency(self) -> WeightedHost:
        """The n x m matrix of a bipartite graph: rows are side-0 vertices, columns side-1 vertices."""
        if self.sides is None:
            raise ValueError("graph has no fixed bipartition")
        left = [v for v, s in zip(self.vertices, self.sides) if s == 0]
        right = [v for v, s in zip(self.vertices, self.sides) if s == 1]
        return WeightedHost(tuple(tuple(self.weight(a, b) for b in right) for a in left))

    def relabelled(self) -> "SimpleGraph":
        """Same graph on vertices 0..n-1 (in vertex order)."""
        idx = {v: i for i, v in enumerate(self.vertices)}
        w = None if self.weights is None else tuple((_edge(idx[u], idx[v]), x) for (u, v), x in self.weights)
        return SimpleGraph(
            tuple(range(self.order)),
            frozenset(_edge(idx[u], idx[v]) for u, v in self.edges),
            self.sides,
            self.colors,
            w,
        )


def host_graph(host: WeightedHost) -> SimpleGraph:
    """Bipartite weighted graph of a host matrix; zero entries are non-edges."""
    verts = [(0, i) for i in range(host.n)] + [(1, j) for j in range(host.m)]
    edges, weights = [], []
    for i in range(host.n):
        for j in range(host.m):
            x = host.entries[i][j]
            if x != 0:
                edges.append(((0, i), (1, j)))
                weights.append((_edge((0, i), (1, j)), x))
    return SimpleGraph.from_edges(verts, edges, sides=[v[0] for v in verts], weights=weights)


def cycle_graph(n: int) -> SimpleGraph:
    return SimpleGraph.from_edges(range(n), [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> SimpleGraph:
    return SimpleGraph.from_edges(range(n), combinations(range(n), 2))


def complete_bipartite(a: int, b: int) -> SimpleGraph:
    verts = list(range(a + b))
    return SimpleGraph.from_edges(verts, [(i, a + j) for i in range(a) for j in range(b)], sides=[0] * a + [1] * b)


def grid_graph(rows: int, cols: int) -> SimpleGraph:
    """The rows x cols grid with its chessboard bipartition."""
    verts = [(r, c) for r in range(rows) for c in range(cols)]
    edges = [((r, c), (r, c + 1)) for r in range(rows) for c in range(cols - 1)]
    edges += [((r, c), (r + 1, c)) for r in range(rows - 1) for c in range(cols)]
    return SimpleGraph.from_edges(verts, edges, sides=[(r + c) % 2 for r, c in verts])


def bipartition_of(g: SimpleGraph) -> SimpleGraph | None:
    """Attach a 2-colouring (0 on the first vertex of each component) if the graph is bipartite."""
    adj = g.adjacency()
    side: dict = {}
    for s in g.vertices:
        if s in side:
            continue
        side[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in side:
                    side[w] = 1 - side[u]
                    stack.append(w)
                elif side[w] == side[u]:
                    return None
    return SimpleGraph(g.vertices, g.edges, tuple(side[v] for v in g.vertices), g.colors, g.weights)


def named_base(name: str) -> SimpleGraph:
    """Small named base graphs: c<n>, k<n>, k<a>,<b>, p<n>, grid<r>x<c>."""
    name = name.lower()
    if name.startswith("grid"):
        r, c = name[4:].split("x")
        return grid_graph(int(r), int(c))
    if name.startswith("c"):
        g = cycle_graph(int(name[1:]))
        return bipartition_of(g) or g
    if name.startswith("p"):
        n = int(name[1:])
        g = SimpleGraph.from_edges(range(n), [(i, i + 1) for i in range(n - 1)])
        return bipartition_of(g) or g
    if name.startswith("k") and "," in name:
        a, b = name[1:].split(",")
        return complete_bipartite(int(a), int(b))
    if name.startswith("k"):
        g = complete_graph(int(name[1:]))
        return bipartition_of(g) or g
    raise ValueError(f"unknown base graph {name!r}")


def atlas_graphs(max_vertices: int, connected: bool = False) -> list[SimpleGraph]:
    """All simple graphs with 1..max_vertices vertices up to isomorphism (networkx graph atlas, <= 7)."""
    if max_vertices > 7:
        raise CapExceeded("the graph atlas covers at most 7 vertices")
    out = []
    for g in nx.graph_atlas_g():
        if 1 <= g.number_of_nodes() <= max_vertices and (not connected or nx.is_connected(g)):
            out.append(SimpleGraph.from_networkx(g))
    return out


# --------------------------------------------------------------------------- CFI graphs


@dataclass(frozen=True)
class CfiInstance:
    base: SimpleGraph
    twist: tuple[int, ...]
    graph: SimpleGraph
    rho: dict = field(compare=False, hash=False)

    @property
    def parity(self) -> int:
        return sum(self.twist) % 2


def gadget_size(base: SimpleGraph) -> int:
    adj = base.adjacency()
    return sum(2 ** (len(adj[v]) - 1) for v in base.vertices)


def _incident(base: SimpleGraph) -> dict:
    adj = base.adjacency()
    return {v: tuple(sorted((_edge(v, u) for u in adj[v]), key=repr)) for v in base.vertices}


def cfi(base: SimpleGraph, twist: Sequence[int]) -> CfiInstance:
    """Vertices (v, T) with T in Z2^{E(v)} of parity U(v); (v,T)~(u,S) iff uv is an edge and T(uv) = S(uv)."""
    twist = tuple(int(x) % 2 for x in twist)
    if len(twist) != base.order:
        raise ValueError(f"twist has {len(twist)} entries for {base.order} base vertices")
    if not base.is_connected():
        raise ValueError("CFI construction needs a connected base graph")
    inc = _incident(base)
    verts, sides, rho = [], [], {}
    side = base.side_of()
    for v, u_v in zip(base.vertices, twist):
        for bits in product((0, 1), repeat=len(inc[v])):
            if sum(bits) % 2 == u_v:
                x = (v, bits)
                verts.append(x)
                rho[x] = v
                if base.sides is not None:
                    sides.append(side[v])
    pos = {v: {e: i for i, e in enumerate(inc[v])} for v in base.vertices}
    by_base: dict = {}
    for x in verts:
        by_base.setdefault(x[0], []).append(x)
    edges = []
    for u, v in base.edges:
        e = _edge(u, v)
        for x in by_base[u]:
            for y in by_base[v]:
                if x[1][pos[u][e]] == y[1][pos[v][e]]:
                    edges.append((x, y))
    g = SimpleGraph.from_edges(verts, edges, sides=sides if base.sides is not None else None)
    return CfiInstance(base, twist, g, rho)


def twist_isomorphism(base: SimpleGraph, u1: Sequence[int], u2: Sequence[int]) -> dict | None:
    """Explicit isomorphism G_{U1} -> G_{U2} when the twists have equal parity; None otherwise.

    Differences are paired up and moved along base paths, flipping T on every path edge.
    """
    if sum(u1) % 2 != sum(u2) % 2:
        return None
    g = base.to_networkx()
    inc = _incident(base)
    diff = [v for v, a, b in zip(base.vertices, u1, u2) if (a - b) % 2]
    flips: dict = {v: set() for v in base.vertices}
    for s, t in zip(diff[::2], diff[1::2]):
        path = nx.shortest_path(g, s, t)
        for a, b in zip(path, path[1:]):
            e = _edge(a, b)
            for w in (a, b):
                flips[w] ^= {e}
    mapping = {}
    for v in base.vertices:
        for bits in product((0, 1), repeat=len(inc[v])):
            if sum(bits) % 2 == u1[base.vertices.index(v)] % 2:
                new = tuple(b ^ (1 if e in flips[v] else 0) for b, e in zip(bits, inc[v]))
                mapping[(v, bits)] = (v, new)
    return mapping


def is_isomorphism(g: SimpleGraph, h: SimpleGraph, mapping: dict) -> bool:
    if set(mapping) != set(g.vertices) or set(mapping.values()) != set(h.vertices):
        return False
    return {_edge(mapping[u], mapping[v]) for u, v in g.edges} == set(h.edges)


def isomorphic(g: SimpleGraph, h: SimpleGraph) -> bool:
    """networkx VF2 isomorphism (respecting sides when both graphs carry them)."""
    nm = None
    if g.sides is not None and h.sides is not None:
        nm = nx.algorithms.isomorphism.categorical_node_match("side", None)
    return nx.is_isomorphic(g.to_networkx(), h.to_networkx(), node_match=nm)


# --------------------------------------------------------------------------- homomorphism counts


def _order_for_search(f: SimpleGraph) -> list:
    adj = f.adjacency()
    order, seen = [], set()
    for s in sorted(f.vertices, key=lambda v: -len(adj[v])):
        if s in seen:
            continue
        frontier = [s]
        while frontier:
            v = max(frontier, key=lambda x: (len(adj[x] & seen), len(adj[x])))
            frontier.remove(v)
            if v in seen:
                continue
            seen.add(v)
            order.append(v)
            frontier.extend(w for w in adj[v] if w not in seen and w not in frontier)
    return order


def enumerate_homs(f: SimpleGraph, g: SimpleGraph, respect_sides: bool = False) -> Iterator[dict]:
    """All homomorphisms F -> G by backtracking (sides preserved when asked)."""
    fadj, gadj = f.adjacency(), g.adjacency()
    order = _order_for_search(f)
    fs, gs = f.side_of(), g.side_of()
    if respect_sides and (not fs or not gs):
        raise ValueError("side-respecting maps need bipartitions on both graphs")
    assign: dict = {}

    def rec(i: int) -> Iterator[dict]:
        if i == len(order):
            yield dict(assign)
            return
        a = order[i]
        placed = [assign[b] for b in fadj[a] if b in assign]
        if placed:
            cands = set(gadj[placed[0]])
            for x in placed[1:]:
                cands &= gadj[x]
        else:
            cands = set(g.vertices)
        if respect_sides:
            cands = {x for x in cands if gs[x] == fs[a]}
        for x in sorted(cands, key=repr):
            assign[a] = x
            yield from rec(i + 1)
            del assign[a]

    yield from rec(0)


def hom_count_brute(f: SimpleGraph, g: SimpleGraph, respect_sides: bool = False, weighted: bool = False):
    if f.order > BRUTE_HOM_CAP:
        raise CapExceeded(f"brute-force hom counting is capped at {BRUTE_HOM_CAP} pattern vertices")
    if not weighted:
        return sum(1 for _ in enumerate_homs(f, g, respect_sides))
    total = Fraction(0)
    for h in enumerate_homs(f, g, respect_sides):
        p = Fraction(1)
        for u, v in f.edges:
            p *= g.weight(h[u], h[v])
        total += p
    return total


def hom_count_dp(
    f: SimpleGraph, g: SimpleGraph, td: TreeDecomposition | None = None, respect_sides: bool = False, weighted: bool = False
):
    """Dynamic programming over a tree decomposition of F; tables indexed by bag assignments."""
    if td is None:
        _, td = treewidth_of_graph(list(f.vertices), list(f.edges))
    kids = td.children()
    parent = {t: s for s in range(td.num_nodes) for t in kids[s]}
    depth = {td.root: 0}
    for s in td.preorder():
        for t in kids[s]:
            depth[t] = depth[s] + 1
    home: dict[int, list] = {s: [] for s in range(td.num_nodes)}
    for u, v in f.edges:
        s = min((s for s, b in enumerate(td.bags) if u in b and v in b), key=depth.__getitem__)
        home[s].append((u, v))
    gverts = list(g.vertices)
    fs, gs = f.side_of(), g.side_of()
    wmap = {}
    for u, v in g.edges:
        w = g.weight(u, v) if weighted else 1
        wmap[(u, v)] = w
        wmap[(v, u)] = w
    zero = Fraction(0) if weighted else 0

    def domain(a):
        if respect_sides:
            return [x for x in gverts if gs[x] == fs[a]]
        return gverts

    def solve(s: int) -> dict:
        bag = sorted(td.bags[s], key=repr)
        child_tables = [(t, solve(t)) for t in kids[s]]
        table: dict = {}
        for vals in product(*(domain(a) for a in bag)):
            h = dict(zip(bag, vals))
            val = 1
            for u, v in home[s]:
                w = wmap.get((h[u], h[v]))
                if w is None:
                    val = 0
                    break
                val *= w
            if not val:
                continue
            for t, ct in child_tables:
                shared = sorted(td.bags[t] & td.bags[s], key=repr)
                val *= ct.get(tuple(h[a] for a in shared), zero)
                if not val:
                    break
            if not val:
                continue
            if s == td.root:
                key = ()
            else:
                key = tuple(h[a] for a in sorted(td.bags[s] & td.bags[parent[s]], key=repr))
            table[key] = table.get(key, zero) + val
        return table

    if f.order == 0:
        return Fraction(1) if weighted else 1
    return solve(td.root).get((), zero)


def hom_count(f: SimpleGraph, g: SimpleGraph, mode: str = "auto", td=None, respect_sides: bool = False, weighted: bool = False):
    """hom(F, G): ``brute`` (backtracking), ``dp`` (tree decomposition of F) or ``auto``."""
    if mode == "brute" or (mode == "auto" and f.order <= 5):
        return hom_count_brute(f, g, respect_sides, weighted)
    if mode in ("dp", "auto"):
        return hom_count_dp(f, g, td, respect_sides, weighted)
    raise ValueError(f"unknown mode {mode!r}")


def _gf2_rank_with_forms(rows: list[tuple[int, int]]) -> tuple[int, list[int]]:
    """Eliminate rows (coefficient mask, rhs form mask). Returns rank and rhs forms of zero rows."""
    pivots: dict[int, tuple[int, int]] = {}
    residual_forms = []
    for coef, rhs in rows:
        while coef:
            top = coef.bit_length() - 1
            if top in pivots:
                pc, pr = pivots[top]
                coef ^= pc
                rhs ^= pr
            else:
                pivots[top] = (coef, rhs)
                break
        else:
            if rhs:
                residual_forms.append(rhs)
    return len(pivots), residual_forms


def cfi_lift_counts(f: SimpleGraph, base: SimpleGraph, twists: Sequence[Sequence[int]], respect_sides: bool = False) -> list[int]:
    """hom(F, G_U) for several twists U, via base homomorphisms and GF(2) lift counting.

    A lift of psi: F -> base picks T_a in Z2^{E(psi(a))} with parity U(psi(a)) and
    T_a(e) = T_b(e) on every edge ab mapped to e; the solution count is 2^(vars - rank)
    when the twist-dependent right-hand side is consistent.
    """
    inc = _incident(base)
    vindex = {v: i for i, v in enumerate(base.vertices)}
    twist_masks = [sum(1 << i for i, x in enumerate(u) if x % 2) for u in twists]
    counts = [0] * len(twists)
    fverts = list(f.vertices)
    for psi in enumerate_homs(f, base, respect_sides):
        var = {}
        for a in fverts:
            for e in inc[psi[a]]:
                var[(a, e)] = len(var)
        rows = []
        for a in fverts:
            coef = 0
            for e in inc[psi[a]]:
                coef |= 1 << var[(a, e)]
            rows.append((coef, 1 << vindex[psi[a]]))
        for a, b in f.edges:
            e = _edge(psi[a], psi[b])
            rows.append(((1 << var[(a, e)]) | (1 << var[(b, e)]), 0))
        rank, forms = _gf2_rank_with_forms(rows)
        free = len(var) - rank
        for idx, mask in enumerate(twist_masks):
            if all(bin(form & mask).count("1") % 2 == 0 for form in forms):
                counts[idx] += 1 << free
    return counts


# --------------------------------------------------------------------------- Weisfeiler-Leman


@dataclass
class WLVerdict:
    equivalent: bool
    k: int
    rounds: int
    fingerprint_g: tuple = field(repr=False)
    fingerprint_h: tuple = field(repr=False)

    def to_json(self) -> dict:
        return {"equivalent": self.equivalent, "wl_dim": self.k, "rounds": self.rounds}


def _atomic_type(g: SimpleGraph, tup: tuple, side: dict, color: dict) -> tuple:
    k = len(tup)
    eq = tuple(tup[i] == tup[j] for i in range(k) for j in range(i + 1, k))
    adj = tuple(str(g.weight(tup[i], tup[j])) for i in range(k) for j in range(i + 1, k))
    lab = tuple((side.get(v), color.get(v)) for v in tup)
    return (eq, adj, lab)


def _wl_colourings(graphs: Sequence[SimpleGraph], k: int, max_rounds: int | None = None):
    """Joint refinement with a shared signature dictionary; yields per-round colour maps."""
    palette: dict = {}

    def compress(sig) -> int:
        return palette.setdefault(sig, len(palette))

    states = []
    for g in graphs:
        side = g.side_of()
        color = dict(zip(g.vertices, g.colors)) if g.colors is not None else {}
        if k == 1:
            cols = {(v,): compress(("init", _atomic_type(g, (v,), side, color))) for v in g.vertices}
        else:
            cols = {t: compress(("init", _atomic_type(g, t, side, color))) for t in product(g.vertices, repeat=k)}
        states.append(cols)
    yield states
    rounds = 0
    while max_rounds is None or rounds < max_rounds:
        rounds += 1
        new_states = []
        for g, cols in zip(graphs, states):
            if k == 1:
                adj = g.adjacency()
                new = {
                    t: compress((c, tuple(sorted((str(g.weight(t[0], w)), cols[(w,)]) for w in adj[t[0]]))))
                    for t, c in cols.items()
                }
            else:
                new = {}
                for t, c in cols.items():
                    ms = sorted(
                        tuple(cols[t[:i] + (w,) + t[i + 1:]] for i in range(k)) for w in g.vertices
                    )
                    new[t] = compress((c, tuple(ms)))
            new_states.append(new)
        stable = all(len(set(n.values())) == len(set(o.values())) for n, o in zip(new_states, states))
        states = new_states
        yield states
        if stable:
            return


def wl_equivalent(g: SimpleGraph, h: SimpleGraph, k: int) -> WLVerdict:
    """k-dimensional WL (k = 1 is colour refinement, k >= 2 the folklore tuple version)."""
    if k < 1:
        raise ValueError("WL dimension must be positive")
    if g.order != h.order:
        return WLVerdict(False, k, 0, (g.order,), (h.order,))
    rounds = -1
    hist_g = hist_h = ()
    for states in _wl_colourings([g, h], k):
        rounds += 1
        hist_g = tuple(sorted(Counter(states[0].values()).items()))
        hist_h = tuple(sorted(Counter(states[1].values()).items()))
        if hist_g != hist_h:
            return WLVerdict(False, k, rounds, hist_g, hist_h)
    return WLVerdict(True, k, rounds, hist_g, hist_h)


def k_wl_equivalent(g: SimpleGraph, h: SimpleGraph, k: int) -> WLVerdict:
    """C^k-equivalence, answered by running (k-1)-dimensional WL (C^2 is colour refinement)."""
    if k < 2:
        raise ValueError("C^k equivalence is defined here for k >= 2")
    return wl_equivalent(g, h, k - 1)


# --------------------------------------------------------------------------- oddomorphisms


@dataclass
class OddoWitness:
    mapping: dict
    sub_edges: frozenset


def is_oddomorphism(f: SimpleGraph, g: SimpleGraph, phi: dict, f_edges: Iterable | None = None) -> bool:
    """Each vertex phi-odd or phi-even, and every fibre holds an odd number of phi-odd vertices."""
    edges = f.edges if f_edges is None else f_edges
    fadj: dict = {v: set() for v in f.vertices}
    for u, v in edges:
        fadj[u].add(v)
        fadj[v].add(u)
    gadj = g.adjacency()
    odd_in_fibre = Counter()
    for a in f.vertices:
        parities = {sum(1 for b in fadj[a] if phi[b] == v) % 2 for v in gadj[phi[a]]}
        if len(parities) > 1:
            return False
        if parities == {1}:
            odd_in_fibre[phi[a]] += 1
    return all(odd_in_fibre[v] % 2 == 1 for v in g.vertices)


def exists_weak_oddomorphism(f: SimpleGraph, g: SimpleGraph, respect_sides: bool = False) -> OddoWitness | None:
    """Exhaustive search over homomorphisms F -> G and spanning edge subsets of F.

    Dropping vertices never matters: an isolated vertex is phi-even and leaves the fibre counts alone.
    """
    if f.order > ODDO_CAP or g.order > ODDO_CAP:
        raise CapExceeded(f"oddomorphism search is capped at {ODDO_CAP} vertices per graph")
    f_edges = sorted(f.edges, key=repr)
    for phi in enumerate_homs(f, g, respect_sides):
        if len(set(phi.values())) < g.order:
            continue
        for r in range(len(f_edges), -1, -1):
            for sub in combinations(f_edges, r):
                if is_oddomorphism(f, g, phi, sub):
                    return OddoWitness(phi, frozenset(sub))
    return None


# --------------------------------------------------------------------------- covers and matchings


def bipartite_double_cover(g: SimpleGraph) -> SimpleGraph:
    """G x K2 with sides (v, 0) on the left and (v, 1) on the right."""
    verts = [(v, s) for s in (0, 1) for v in g.vertices]
    edges = []
    for u, v in g.edges:
        edges.append(((u, 0), (v, 1)))
        edges.append(((v, 0), (u, 1)))
    weights = None
    if g.weights is not None:
        weights = []
        for u, v in g.edges:
            w = g.weight(u, v)
            weights.append((_edge((u, 0), (v, 1)), w))
            weights.append((_edge((v, 0), (u, 1)), w))
    return SimpleGraph.from_edges(verts, edges, sides=[s for _, s in verts], weights=weights)


def matching_counts(g: SimpleGraph, h: int) -> int:
    """Number of matchings with exactly h edges."""
    edges = sorted(g.edges, key=repr)
    if len(edges) > MATCHING_EDGE_CAP and h > 3:
        raise CapExceeded(f"matching enumeration is capped at {MATCHING_EDGE_CAP} edges")

    def rec(start: int, used: frozenset, left: int) -> int:
        if left == 0:
            return 1
        total = 0
        for i in range(start, len(edges)):
            u, v = edges[i]
            if u in used or v in used:
                continue
            total += rec(i + 1, used | {u, v}, left - 1)
        return total

    return rec(0, frozenset(), h)


# --------------------------------------------------------------------------- experiments


def treewidth(g: SimpleGraph) -> int:
    return treewidth_of_graph(list(g.vertices), list(g.edges))[0]


def cfi_pairs(bases: Iterable[SimpleGraph], limit_per_base: int | None = None, rng=None) -> Iterator[dict]:
    """(G_U, G_U') pairs with opposite twist parity, over every base; optionally subsampled."""
    for bi, base in enumerate(bases):
        twists = list(product((0, 1), repeat=base.order))
        pairs = [(u, w) for u in twists if sum(u) % 2 == 0 for w in twists if sum(w) % 2 == 1]
        if limit_per_base is not None and len(pairs) > limit_per_base:
            pairs = (rng.sample(pairs, limit_per_base) if rng is not None else pairs[:limit_per_base])
        for u, w in pairs:
            yield {"base": bi, "twist_g": u, "twist_h": w, "g": cfi(base, u).graph, "h": cfi(base, w).graph}


def counting_width_experiment(
    evaluate: Callable[[SimpleGraph], object],
    k: int,
    pairs: Iterable[dict],
    check_equivalence: bool = True,
) -> list[dict]:
    """Evaluate on both sides of each pair; records the C^k verdict (if checked) and any value gap."""
    report = []
    for idx, pair in enumerate(pairs):
        g, h = pair["g"], pair["h"]
        row = {"instance": idx, "k": k}
        for key in ("base", "twist_g", "twist_h"):
            if key in pair:
                row[key] = pair[key]
        if check_equivalence:
            row["ck_equivalent"] = k_wl_equivalent(g, h, k).equivalent
        vg, vh = evaluate(g), evaluate(h)
        row["value_g"] = str(vg)
        row["value_h"] = str(vh)
        row["gap"] = vg != vh
        report.append(row)
    return report
