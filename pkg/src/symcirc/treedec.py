"""Tree decompositions: validation, exact treewidth by subset DP, the synthesis-ready normal form, PACE I/O."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable, Iterable, Mapping

from .graphs import LEFT, RIGHT, BipartitePattern, Vertex
from .partitions import CapExceeded

TREEWIDTH_CAP = 12


@dataclass(frozen=True)
class TreeDecomposition:
    """A rooted tree of bags. Nodes are ``0..len(bags)-1``; ``edges`` are undirected node pairs."""

    bags: tuple[frozenset, ...]
    edges: tuple[tuple[int, int], ...] = ()
    root: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "bags", tuple(frozenset(b) for b in self.bags))
        object.__setattr__(self, "edges", tuple(tuple(sorted(e)) for e in self.edges))

    @classmethod
    def single_bag(cls, vertices: Iterable[Hashable]) -> "TreeDecomposition":
        return cls((frozenset(vertices),))

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    @property
    def num_nodes(self) -> int:
        return len(self.bags)

    def neighbours(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.bags]
        for s, t in self.edges:
            adj[s].append(t)
            adj[t].append(s)
        return adj

    def children(self) -> list[list[int]]:
        """Child lists of the tree rooted at ``root`` (assumes a valid tree)."""
        adj = self.neighbours()
        out: list[list[int]] = [[] for _ in self.bags]
        seen = {self.root}
        queue = deque([self.root])
        while queue:
            s = queue.popleft()
            for t in sorted(adj[s]):
                if t not in seen:
                    seen.add(t)
                    out[s].append(t)
                    queue.append(t)
        return out

    def preorder(self) -> list[int]:
        kids = self.children()
        order, stack = [], [self.root]
        while stack:
            s = stack.pop()
            order.append(s)
            stack.extend(reversed(kids[s]))
        return order


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    width: int | None = None
    violation: str | None = None
    witness: object = None

    def __bool__(self) -> bool:
        return self.valid


def _is_tree(td: TreeDecomposition) -> tuple[bool, str | None]:
    n = td.num_nodes
    if n == 0:
        return True, None
    if not 0 <= td.root < n:
        return False, f"root {td.root} is not a node"
    if len(set(td.edges)) != len(td.edges) or any(s == t for s, t in td.edges):
        return False, "repeated edge or loop in the decomposition tree"
    if any(not (0 <= s < n and 0 <= t < n) for s, t in td.edges):
        return False, "tree edge references a missing node"
    if len(td.edges) != n - 1:
        return False, f"{n} nodes but {len(td.edges)} tree edges"
    adj = td.neighbours()
    seen = {0}
    stack = [0]
    while stack:
        for t in adj[stack.pop()]:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    if len(seen) != n:
        return False, "decomposition tree is disconnected"
    return True, None


def validate_graph_decomposition(
    vertices: Iterable[Hashable], edges: Iterable[tuple[Hashable, Hashable]], td: TreeDecomposition
) -> ValidationReport:
    """Check the three tree-decomposition conditions for an arbitrary simple graph."""
    vertices = list(vertices)
    vset = set(vertices)
    ok, why = _is_tree(td)
    if not ok:
        return ValidationReport(False, violation="not a tree", witness=why)
    stray = [v for b in td.bags for v in b if v not in vset]
    if stray:
        return ValidationReport(False, violation="unknown vertex", witness=stray[0])
    covered = set().union(*td.bags) if td.bags else set()
    for v in vertices:
        if v not in covered:
            return ValidationReport(False, violation="vertex coverage", witness=v)
    for u, v in edges:
        if not any(u in b and v in b for b in td.bags):
            return ValidationReport(False, violation="edge coverage", witness=(u, v))
    adj = td.neighbours()
    for v in vertices:
        nodes = [s for s, b in enumerate(td.bags) if v in b]
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            for t in adj[stack.pop()]:
                if t not in seen and v in td.bags[t]:
                    seen.add(t)
                    stack.append(t)
        if len(seen) != len(nodes):
            return ValidationReport(False, violation="connectivity", witness=v)
    return ValidationReport(True, width=td.width)


def pattern_edges(pattern: BipartitePattern) -> list[tuple[Vertex, Vertex]]:
    return [((LEFT, a), (RIGHT, b)) for a, b in pattern.simple_edges()]


def validate_tree_decomposition(pattern: BipartitePattern, td: TreeDecomposition) -> ValidationReport:
    """Width if ``td`` is a tree decomposition of the pattern, else the first violated condition."""
    return validate_graph_decomposition(pattern.vertices(), pattern_edges(pattern), td)


# --------------------------------------------------------------------------- exact treewidth


def treewidth_of_graph(
    vertices: list[Hashable], edges: Iterable[tuple[Hashable, Hashable]], cap: int = TREEWIDTH_CAP
) -> tuple[int, TreeDecomposition]:
    """Exact treewidth via TW(S) = min_v max(TW(S-v), |Q(S-v, v)|) plus a witness decomposition."""
    n = len(vertices)
    if n > cap:
        raise CapExceeded(
            f"exact treewidth is capped at {cap} vertices (got {n}); provide a decomposition instead"
        )
    if n == 0:
        return -1, TreeDecomposition((frozenset(),))
    index = {v: i for i, v in enumerate(vertices)}
    nbr = [0] * n
    for u, v in edges:
        iu, iv = index[u], index[v]
        if iu != iv:
            nbr[iu] |= 1 << iv
            nbr[iv] |= 1 << iu

    def q_size(s: int, v: int) -> int:
        # vertices outside s | {v} reachable from v through s
        reach, frontier, out = 1 << v, 1 << v, 0
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= nbr[low.bit_length() - 1]
                f ^= low
            out |= nxt & ~s & ~(1 << v)
            nxt &= s & ~reach
            reach |= nxt
            frontier = nxt
        return bin(out).count("1")

    full = (1 << n) - 1
    tw = [0] * (1 << n)
    choice = [0] * (1 << n)
    tw[0] = -1
    for s in range(1, 1 << n):
        best, arg = n + 1, -1
        rest = s
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            rest ^= low
            val = max(tw[s ^ low], q_size(s ^ low, v))
            if val < best:
                best, arg = val, v
        tw[s], choice[s] = best, arg
    order: list[int] = []
    s = full
    while s:
        v = choice[s]
        order.append(v)
        s ^= 1 << v
    order.reverse()
    td = decomposition_from_order([vertices[i] for i in order], edges)
    return tw[full], td


def decomposition_from_order(order: list[Hashable], edges: Iterable[tuple[Hashable, Hashable]]) -> TreeDecomposition:
    """Tree decomposition induced by an elimination order (a forest is joined into one tree)."""
    pos = {v: i for i, v in enumerate(order)}
    adj: dict[Hashable, set] = {v: set() for v in order}
    for u, v in edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    bags: list[frozenset] = []
    parent_vertex: list[Hashable | None] = []
    for v in order:
        later = {u for u in adj[v] if pos[u] > pos[v]}
        bags.append(frozenset(later | {v}))
        parent_vertex.append(min(later, key=pos.__getitem__) if later else None)
        for a in later:
            adj[a] |= later - {a}
    tree_edges = []
    roots = []
    for i, pv in enumerate(parent_vertex):
        if pv is None:
            roots.append(i)
        else:
            tree_edges.append((i, pos[pv]))
    for r in roots[:-1]:
        tree_edges.append((r, roots[-1]))
    return TreeDecomposition(tuple(bags), tuple(tree_edges), root=roots[-1])


def exact_treewidth(pattern: BipartitePattern, cap: int = TREEWIDTH_CAP) -> tuple[int, TreeDecomposition]:
    """Treewidth of the underlying simple graph and a witness decomposition of that width."""
    return treewidth_of_graph(pattern.vertices(), pattern_edges(pattern), cap)


@lru_cache(maxsize=None)
def cached_treewidth(pattern: BipartitePattern) -> tuple[int, TreeDecomposition]:
    return exact_treewidth(pattern)


# --------------------------------------------------------------------------- normal form


def is_conforming(td: TreeDecomposition, k: int) -> bool:
    """Uniform bag size k, adjacent bags meeting in k-1 vertices, every out-degree at most k."""
    if any(len(b) != k for b in td.bags):
        return False
    if any(len(td.bags[s] & td.bags[t]) != k - 1 for s, t in td.edges):
        return False
    return all(len(c) <= k for c in td.children())


def nice_decomposition(pattern: BipartitePattern, td: TreeDecomposition) -> TreeDecomposition:
    """Rewrite a valid decomposition into the shape required by circuit synthesis.

    With k the maximum bag size: bags all have size k, adjacent bags share k-1
    vertices, and every node has at most k children. If the pattern has at
    most k vertices the result is a single bag.
    """
    report = validate_tree_decomposition(pattern, td)
    if not report:
        raise ValueError(f"invalid tree decomposition: {report.violation} ({report.witness})")
    k = td.width + 1
    verts = pattern.vertices()
    if len(verts) <= k:
        if td.num_nodes == 1:
            return td
        return TreeDecomposition.single_bag(verts)
    if is_conforming(td, k):
        return td

    bags: dict[int, set] = {i: set(b) for i, b in enumerate(td.bags)}
    adj: dict[int, set[int]] = {i: set() for i in bags}
    for s, t in td.edges:
        adj[s].add(t)
        adj[t].add(s)
    root = td.root

    def merge(drop: int, keep: int) -> None:
        nonlocal root
        for u in adj.pop(drop):
            adj[u].discard(drop)
            if u != keep:
                adj[u].add(keep)
                adj[keep].add(u)
        del bags[drop]
        if root == drop:
            root = keep

    changed = True
    while changed:
        changed = False
        for s in sorted(bags):
            if s not in bags:
                continue
            for t in sorted(adj[s]):
                if bags[s] <= bags[t]:
                    merge(s, t)
                    changed = True
                    break
        for s in sorted(bags):
            while len(bags[s]) < k:
                extra = next(
                    (v for t in sorted(adj[s]) for v in sorted(bags[t] - bags[s])), None
                )
                if extra is None:
                    break
                bags[s].add(extra)
                changed = True

    # subdivide edges whose bags meet in fewer than k-1 vertices
    nxt = max(bags) + 1
    for s in sorted(bags):
        for t in sorted(adj[s]):
            if t < s or t not in adj[s]:
                continue
            out_v = sorted(bags[s] - bags[t])
            in_v = sorted(bags[t] - bags[s])
            if len(out_v) <= 1:
                continue
            adj[s].discard(t)
            adj[t].discard(s)
            prev, cur = s, set(bags[s])
            for x, y in zip(out_v[:-1], in_v[:-1]):
                cur = (cur - {x}) | {y}
                bags[nxt] = set(cur)
                adj[nxt] = {prev}
                adj[prev].add(nxt)
                prev, nxt = nxt, nxt + 1
            adj[prev].add(t)
            adj[t].add(prev)

    # bound out-degrees: children dropping the same parent vertex are re-hung under one of them
    kids: dict[int, list[int]] = {}
    seen = {root}
    queue = deque([root])
    order = []
    while queue:
        s = queue.popleft()
        order.append(s)
        kids[s] = []
        for t in sorted(adj[s]):
            if t not in seen:
                seen.add(t)
                kids[s].append(t)
                queue.append(t)
    queue = deque([root])
    while queue:
        s = queue.popleft()
        if len(kids[s]) > k:
            groups: dict[Hashable, list[int]] = {}
            for c in kids[s]:
                (dropped,) = bags[s] - bags[c]
                groups.setdefault(dropped, []).append(c)
            new_kids = []
            for members in groups.values():
                head = members[0]
                new_kids.append(head)
                for c in members[1:]:
                    if bags[c] == bags[head]:
                        kids[head].extend(kids.pop(c))
                        del bags[c]
                    else:
                        kids[head].append(c)
            kids[s] = new_kids
        queue.extend(kids[s])

    renumber = {}
    stack = [root]
    while stack:
        s = stack.pop()
        renumber[s] = len(renumber)
        stack.extend(reversed(kids[s]))
    new_bags = [frozenset()] * len(renumber)
    for s, i in renumber.items():
        new_bags[i] = frozenset(bags[s])
    new_edges = tuple((renumber[s], renumber[c]) for s in renumber for c in kids[s])
    return TreeDecomposition(tuple(new_bags), new_edges, root=0)


# --------------------------------------------------------------------------- PACE format


def _vertex_number(pattern: BipartitePattern, v: Vertex) -> int:
    side, idx = v
    return idx + 1 if side == LEFT else pattern.left_size + idx + 1


def _number_vertex(pattern: BipartitePattern, x: int) -> Vertex:
    if not 1 <= x <= pattern.num_vertices:
        raise ValueError(f"vertex {x} out of range 1..{pattern.num_vertices}")
    return (LEFT, x - 1) if x <= pattern.left_size else (RIGHT, x - pattern.left_size - 1)


def to_pace(pattern: BipartitePattern, td: TreeDecomposition) -> str:
    """PACE-2017 .td text; left vertex a is ``a+1`` and right vertex b is ``left_size+b+1``. Root is bag 1."""
    order = [td.root] + [s for s in range(td.num_nodes) if s != td.root]
    ids = {s: i + 1 for i, s in enumerate(order)}
    lines = [f"s td {td.num_nodes} {td.width + 1} {pattern.num_vertices}"]
    for s in order:
        verts = sorted(_vertex_number(pattern, v) for v in td.bags[s])
        lines.append(" ".join(["b", str(ids[s])] + [str(x) for x in verts]))
    for s, t in td.edges:
        lines.append(f"{ids[s]} {ids[t]}")
    return "\n".join(lines) + "\n"


def from_pace(text: str, pattern: BipartitePattern) -> TreeDecomposition:
    """Parse PACE-2017 .td text; bag 1 becomes the root."""
    header = None
    bags: dict[int, frozenset] = {}
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        try:
            if parts[0] == "s":
                if parts[1] != "td" or len(parts) != 5:
                    raise ValueError("bad header")
                header = tuple(int(x) for x in parts[2:])
            elif parts[0] == "b":
                bags[int(parts[1])] = frozenset(_number_vertex(pattern, int(x)) for x in parts[2:])
            else:
                s, t = (int(x) for x in parts)
                edges.append((s, t))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: malformed PACE line {raw!r}: {exc}") from exc
    if header is None:
        raise ValueError("missing 's td' header")
    nbags, _, nverts = header
    if nverts != pattern.num_vertices:
        raise ValueError(f"header declares {nverts} vertices, pattern has {pattern.num_vertices}")
    if sorted(bags) != list(range(1, nbags + 1)):
        raise ValueError("bag ids must be exactly 1..#bags")
    for s, t in edges:
        if s not in bags or t not in bags:
            raise ValueError(f"tree edge {s} {t} references a missing bag")
    return TreeDecomposition(
        tuple(bags[i] for i in range(1, nbags + 1)), tuple((s - 1, t - 1) for s, t in edges), root=0
    )


def decomposition_from_mapping(bags: Mapping[int, Iterable[Vertex]], edges: Iterable[tuple[int, int]], root: int = 0) -> TreeDecomposition:
    keys = sorted(bags)
    idx = {s: i for i, s in enumerate(keys)}
    return TreeDecomposition(
        tuple(frozenset(bags[s]) for s in keys), tuple((idx[s], idx[t]) for s, t in edges), root=idx[root]
    )
