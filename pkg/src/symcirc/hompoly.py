"""Linear combinations of labelled homomorphism polynomials and the operations on them:
swap, unlabel, glue, tensor, restricted sums, products and restricted products."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product as iproduct
from math import factorial
from typing import Iterable, Sequence

import numpy as np

from .graphs import LEFT, RIGHT, BipartitePattern, LabelledPattern, Vertex, WeightedHost, canonical_key
from .partitions import CapExceeded, enumerate_partitions, moebius
from .treedec import TreeDecomposition, validate_tree_decomposition

PRODUCT_N_CAP = 5
PRODUCT_TERM_CAP = 3


# --------------------------------------------------------------------------- labelled patterns


def _certificate(lp: LabelledPattern) -> TreeDecomposition:
    cert = lp.certificate
    if cert is None:
        return TreeDecomposition.single_bag(lp.base.vertices())
    return cert  # type: ignore[return-value]


def with_single_bag(lp: LabelledPattern) -> LabelledPattern:
    return LabelledPattern(lp.base, lp.left_labels, lp.right_labels, TreeDecomposition.single_bag(lp.base.vertices()))


def certificate_ok(lp: LabelledPattern) -> bool:
    """The certificate is a valid decomposition whose root bag holds every labelled vertex."""
    cert = _certificate(lp)
    if not validate_tree_decomposition(lp.base, cert):
        return False
    return lp.labelled_vertices() <= cert.bags[cert.root]


def certificate_width(lp: LabelledPattern) -> int:
    return _certificate(lp).width


def edge_pattern() -> LabelledPattern:
    """One edge with both endpoints labelled: evaluates to G(v, w)."""
    return LabelledPattern(BipartitePattern(1, 1, ((0, 0, 1),)), (0,), (0,), TreeDecomposition.single_bag([(0, 0), (1, 0)]))


def one_pattern(ell: int, r: int) -> LabelledPattern:
    """Edgeless pattern with every label on its own vertex: constantly 1."""
    base = BipartitePattern(ell, r)
    return LabelledPattern(base, tuple(range(ell)), tuple(range(r)), TreeDecomposition.single_bag(base.vertices()))


def diagonal_pattern(ell: int, r: int, i: int, j: int) -> LabelledPattern:
    """Edgeless pattern whose left labels i and j share a vertex: the indicator of v_i = v_j."""
    if i == j or not (0 <= i < ell and 0 <= j < ell):
        raise ValueError("need two distinct left label positions")
    labels, nxt = [], 0
    for p in range(ell):
        if p == max(i, j):
            labels.append(labels[min(i, j)])
        else:
            labels.append(nxt)
            nxt += 1
    base = BipartitePattern(ell - 1, r)
    return LabelledPattern(base, tuple(labels), tuple(range(r)), TreeDecomposition.single_bag(base.vertices()))


def _relabel_td(td: TreeDecomposition, vmap: dict, offset: int = 0) -> tuple[list[frozenset], list[tuple[int, int]]]:
    bags = [frozenset(vmap[v] for v in b) for b in td.bags]
    edges = [(s + offset, t + offset) for s, t in td.edges]
    return bags, edges


def _join(parts: Sequence[tuple[LabelledPattern, dict]], base: BipartitePattern, left_labels, right_labels) -> LabelledPattern:
    """Combine certificates of several patterns under vertex maps, adding a fresh root with all labels."""
    root_bag = frozenset({(LEFT, a) for a in left_labels} | {(RIGHT, b) for b in right_labels})
    bags: list[frozenset] = [root_bag]
    edges: list[tuple[int, int]] = []
    for lp, vmap in parts:
        cert = _certificate(lp)
        offset = len(bags)
        b, e = _relabel_td(cert, vmap, offset)
        bags.extend(b)
        edges.extend(e)
        edges.append((0, offset + cert.root))
    return LabelledPattern(base, tuple(left_labels), tuple(right_labels), TreeDecomposition(tuple(bags), tuple(edges), 0))


def glue_patterns(p: LabelledPattern, q: LabelledPattern) -> LabelledPattern:
    """Disjoint union identifying the i-th labelled vertices of both patterns."""
    if p.arity != q.arity:
        raise ValueError(f"arity mismatch {p.arity} vs {q.arity}")
    pl, pr = p.base.left_size, p.base.right_size
    # union-find over left and right vertices of the disjoint union
    parent_l = list(range(pl + q.base.left_size))
    parent_r = list(range(pr + q.base.right_size))

    def find(par, x):
        while par[x] != x:
            par[x] = par[par[x]]
            x = par[x]
        return x

    def union(par, x, y):
        rx, ry = find(par, x), find(par, y)
        if rx != ry:
            par[max(rx, ry)] = min(rx, ry)

    for a, a2 in zip(p.left_labels, q.left_labels):
        union(parent_l, a, pl + a2)
    for b, b2 in zip(p.right_labels, q.right_labels):
        union(parent_r, b, pr + b2)
    roots_l = sorted({find(parent_l, x) for x in range(len(parent_l))})
    roots_r = sorted({find(parent_r, x) for x in range(len(parent_r))})
    il = {x: roots_l.index(find(parent_l, x)) for x in range(len(parent_l))}
    ir = {x: roots_r.index(find(parent_r, x)) for x in range(len(parent_r))}
    edges = [(il[a], ir[b], k) for a, b, k in p.base.edges] + [(il[pl + a], ir[pr + b], k) for a, b, k in q.base.edges]
    base = BipartitePattern(len(roots_l), len(roots_r), tuple(edges))
    map_p = {(LEFT, a): (LEFT, il[a]) for a in range(pl)} | {(RIGHT, b): (RIGHT, ir[b]) for b in range(pr)}
    map_q = {(LEFT, a): (LEFT, il[pl + a]) for a in range(q.base.left_size)} | {
        (RIGHT, b): (RIGHT, ir[pr + b]) for b in range(q.base.right_size)
    }
    ll = [il[a] for a in p.left_labels]
    rl = [ir[b] for b in p.right_labels]
    return _join([(p, map_p), (q, map_q)], base, ll, rl)


def tensor_patterns(p: LabelledPattern, q: LabelledPattern) -> LabelledPattern:
    """Disjoint union with label tuples concatenated."""
    pl, pr = p.base.left_size, p.base.right_size
    edges = list(p.base.edges) + [(pl + a, pr + b, k) for a, b, k in q.base.edges]
    base = BipartitePattern(pl + q.base.left_size, pr + q.base.right_size, tuple(edges))
    map_p = {v: v for v in p.base.vertices()}
    map_q = {(LEFT, a): (LEFT, pl + a) for a in range(q.base.left_size)} | {
        (RIGHT, b): (RIGHT, pr + b) for b in range(q.base.right_size)
    }
    ll = list(p.left_labels) + [pl + a for a in q.left_labels]
    rl = list(p.right_labels) + [pr + b for b in q.right_labels]
    return _join([(p, map_p), (q, map_q)], base, ll, rl)


def swap_pattern(p: LabelledPattern) -> LabelledPattern:
    cert = _certificate(p)
    flip = {v: (1 - v[0], v[1]) for v in p.base.vertices()}
    bags, edges = _relabel_td(cert, flip)
    return LabelledPattern(
        p.base.transpose(), p.right_labels, p.left_labels, TreeDecomposition(tuple(bags), tuple(edges), cert.root)
    )


def unlabel_pattern(p: LabelledPattern, i: int) -> LabelledPattern:
    if not 0 <= i < len(p.left_labels):
        raise IndexError(f"no left label {i}")
    return LabelledPattern(p.base, p.left_labels[:i] + p.left_labels[i + 1:], p.right_labels, p.certificate)


# --------------------------------------------------------------------------- expressions


@dataclass(frozen=True)
class HomPolyExpr:
    n: int
    m: int
    ell: int
    r: int
    terms: tuple[tuple[Fraction, LabelledPattern], ...] = ()

    def __post_init__(self) -> None:
        for c, lp in self.terms:
            if lp.arity != (self.ell, self.r):
                raise ValueError(f"term arity {lp.arity} differs from ({self.ell}, {self.r})")

    @classmethod
    def of(cls, n: int, m: int, lp: LabelledPattern, coeff: Fraction | int = 1) -> "HomPolyExpr":
        ell, r = lp.arity
        if lp.certificate is None:
            lp = with_single_bag(lp)
        return cls(n, m, ell, r, ((Fraction(coeff), lp),))

    @classmethod
    def one(cls, n: int, m: int, ell: int, r: int) -> "HomPolyExpr":
        return cls.of(n, m, one_pattern(ell, r))

    @classmethod
    def zero(cls, n: int, m: int, ell: int, r: int) -> "HomPolyExpr":
        return cls(n, m, ell, r, ())

    def _same_space(self, other: "HomPolyExpr") -> None:
        if (self.n, self.m) != (other.n, other.m):
            raise ValueError("expressions target different host sizes")
        if (self.ell, self.r) != (other.ell, other.r):
            raise ValueError("expressions have different label arities")

    def __add__(self, other: "HomPolyExpr") -> "HomPolyExpr":
        self._same_space(other)
        return HomPolyExpr(self.n, self.m, self.ell, self.r, self.terms + other.terms).normalized()

    def __sub__(self, other: "HomPolyExpr") -> "HomPolyExpr":
        return self + other.scaled(-1)

    def scaled(self, c: Fraction | int) -> "HomPolyExpr":
        c = Fraction(c)
        if c == 0:
            return HomPolyExpr.zero(self.n, self.m, self.ell, self.r)
        return HomPolyExpr(self.n, self.m, self.ell, self.r, tuple((a * c, p) for a, p in self.terms))

    def normalized(self) -> "HomPolyExpr":
        """Merge isomorphic terms (when a canonical form is found) and drop zero coefficients."""
        acc: dict[object, list] = {}
        order = []
        for c, lp in self.terms:
            key = canonical_key(lp)
            if key is None:
                key = ("raw", id(lp), len(order))
            if key not in acc:
                acc[key] = [Fraction(0), lp]
                order.append(key)
            acc[key][0] += c
        terms = tuple((acc[k][0], acc[k][1]) for k in order if acc[k][0] != 0)
        return HomPolyExpr(self.n, self.m, self.ell, self.r, terms)

    @property
    def width(self) -> int:
        """Largest certificate bag size among the terms (the k of the class)."""
        return max((certificate_width(lp) + 1 for _, lp in self.terms), default=0)

    def certificates_ok(self) -> bool:
        return all(certificate_ok(lp) for _, lp in self.terms)

    def __len__(self) -> int:
        return len(self.terms)


# --------------------------------------------------------------------------- evaluation


def _integer_host(host: WeightedHost) -> tuple[np.ndarray, int]:
    from math import lcm

    den = lcm(*(x.denominator for row in host.entries for x in row))
    return np.array([[int(x * den) for x in row] for row in host.entries], dtype=object), den


def _factor_product(factors: list[tuple[tuple, np.ndarray]], keep: tuple) -> np.ndarray:
    """Multiply factors over named axes and sum out every axis not in ``keep``."""
    axes: list = list(keep)
    for vs, _ in factors:
        for v in vs:
            if v not in axes:
                axes.append(v)
    result = None
    for vs, arr in factors:
        arr = np.asarray(arr, dtype=object)
        perm = sorted(range(len(vs)), key=lambda i: axes.index(vs[i]))
        arr = np.transpose(arr, perm) if len(vs) > 1 else arr
        placed = [axes.index(vs[i]) for i in perm]
        shape = [1] * len(axes)
        for pos, size in zip(placed, arr.shape):
            shape[pos] = size
        arr = arr.reshape(shape)
        result = arr if result is None else result * arr
    if result is None:
        return np.array(1, dtype=object)
    return np.asarray(result, dtype=object)


def labelled_table(lp: LabelledPattern, nums: np.ndarray, n: int, m: int) -> tuple[list[Vertex], np.ndarray]:
    """Integer table over the distinct labelled vertices of sum_h prod N^mult (host numerators N).

    Dynamic programming over the certificate decomposition; every other vertex is summed out.
    """
    base = lp.base
    cert = _certificate(lp)
    labelled = sorted(lp.labelled_vertices())
    dom = {v: (n if v[0] == LEFT else m) for v in base.vertices()}
    kids = cert.children()
    depth = {cert.root: 0}
    for s in cert.preorder():
        for t in kids[s]:
            depth[t] = depth[s] + 1
    local: dict[int, list] = {s: [] for s in range(cert.num_nodes)}
    for a, b, k in base.edges:
        u, v = (LEFT, a), (RIGHT, b)
        home = min((s for s, bag in enumerate(cert.bags) if u in bag and v in bag), key=depth.__getitem__)
        mat = nums if k == 1 else nums**k
        local[home].append(((u, v), mat))
    keep_set = set(labelled)
    parent = {t: s for s in range(cert.num_nodes) for t in kids[s]}

    def solve(s: int) -> tuple[tuple, np.ndarray]:
        bag = tuple(sorted(cert.bags[s]))
        factors: list[tuple[tuple, np.ndarray]] = []
        for v in bag:
            ones = np.empty(dom[v], dtype=object)
            ones[:] = 1
            factors.append(((v,), ones))
        factors.extend(local[s])
        for t in kids[s]:
            factors.append(solve(t))
        if s == cert.root:
            keep = tuple(labelled)
        else:
            # the parent only needs shared vertices; labelled vertices are carried up to the root
            keep = tuple(v for v in bag if v in cert.bags[parent[s]] or v in keep_set)
            keep += tuple(v for vs, _ in factors for v in vs if v in keep_set and v not in keep and v not in bag)
            keep = tuple(dict.fromkeys(keep))
        arr = _factor_product(factors, keep)
        summed = tuple(range(len(keep), arr.ndim))
        if summed:
            # a full reduction of an object array yields a bare Python int
            arr = np.asarray(arr.sum(axis=summed), dtype=object)
        return keep, arr

    _, arr = solve(cert.root)
    return labelled, arr


def eval_table(expr: HomPolyExpr, host: WeightedHost) -> dict[tuple[tuple[int, ...], tuple[int, ...]], Fraction]:
    """Values at every (v, w) in [n]^ell x [m]^r."""
    if (host.n, host.m) != (expr.n, expr.m):
        raise ValueError(f"host is {host.n}x{host.m}, expression targets {expr.n}x{expr.m}")
    nums, den = _integer_host(host)
    tuples = list(iproduct(iproduct(range(expr.n), repeat=expr.ell), iproduct(range(expr.m), repeat=expr.r)))
    out = {t: Fraction(0) for t in tuples}
    for coeff, lp in expr.terms:
        verts, arr = labelled_table(lp, nums, expr.n, expr.m)
        pos = {v: i for i, v in enumerate(verts)}
        scale = coeff / den ** lp.base.num_edges
        for v, w in tuples:
            assign: dict[Vertex, int] = {}
            ok = True
            for a, val in zip(lp.left_labels, v):
                if assign.setdefault((LEFT, a), val) != val:
                    ok = False
                    break
            if ok:
                for b, val in zip(lp.right_labels, w):
                    if assign.setdefault((RIGHT, b), val) != val:
                        ok = False
                        break
            if not ok:
                continue
            idx = tuple(assign[x] for x in verts)
            val = arr[idx] if idx else (arr if np.ndim(arr) == 0 else arr[()])
            out[(v, w)] += scale * int(val)
    return out


def eval_expr(expr: HomPolyExpr, v: Sequence[int], w: Sequence[int], host: WeightedHost) -> Fraction:
    """Sum_t alpha_t * sum over maps pinned at the labels of the edge-weight product."""
    v, w = tuple(v), tuple(w)
    if len(v) != expr.ell or len(w) != expr.r:
        raise ValueError("tuple lengths differ from the label arities")
    if any(not 0 <= x < expr.n for x in v) or any(not 0 <= x < expr.m for x in w):
        raise ValueError("label target out of range")
    sub = HomPolyExpr(expr.n, expr.m, expr.ell, expr.r, expr.terms)
    return eval_table(sub, host)[(v, w)]


# --------------------------------------------------------------------------- operations


def swap(expr: HomPolyExpr) -> HomPolyExpr:
    return HomPolyExpr(expr.m, expr.n, expr.r, expr.ell, tuple((c, swap_pattern(p)) for c, p in expr.terms))


def unlabel(expr: HomPolyExpr, i: int) -> HomPolyExpr:
    if not 0 <= i < expr.ell:
        raise IndexError(f"label index {i} out of range for ell={expr.ell}")
    return HomPolyExpr(
        expr.n, expr.m, expr.ell - 1, expr.r, tuple((c, unlabel_pattern(p, i)) for c, p in expr.terms)
    ).normalized()


def glue(a: HomPolyExpr, b: HomPolyExpr) -> HomPolyExpr:
    a._same_space(b)
    terms = tuple((c1 * c2, glue_patterns(p1, p2)) for c1, p1 in a.terms for c2, p2 in b.terms)
    return HomPolyExpr(a.n, a.m, a.ell, a.r, terms).normalized()


def tensor(a: HomPolyExpr, b: HomPolyExpr) -> HomPolyExpr:
    if (a.n, a.m) != (b.n, b.m):
        raise ValueError("expressions target different host sizes")
    terms = tuple((c1 * c2, tensor_patterns(p1, p2)) for c1, p1 in a.terms for c2, p2 in b.terms)
    return HomPolyExpr(a.n, a.m, a.ell + b.ell, a.r + b.r, terms).normalized()


def lagrange_coefficients(values: Sequence[Fraction | int]) -> list[Fraction]:
    """Coefficients c_0..c_d of the polynomial p with p(x) = values[x] for x = 0..d."""
    d = len(values) - 1
    coeffs = [Fraction(0)] * (d + 1)
    for x, y in enumerate(values):
        if y == 0:
            continue
        basis = [Fraction(1)]
        denom = Fraction(1)
        for z in range(d + 1):
            if z == x:
                continue
            basis = [Fraction(0)] + basis
            for e in range(len(basis) - 1):
                basis[e] -= z * basis[e + 1]
            denom *= x - z
        for e, c in enumerate(basis):
            coeffs[e] += Fraction(y) * c / denom
    return coeffs


def apply_polynomial(coeffs: Sequence[Fraction], expr: HomPolyExpr) -> HomPolyExpr:
    """p(expr) with powers taken as point-wise (glue) products."""
    result = HomPolyExpr.zero(expr.n, expr.m, expr.ell, expr.r)
    power = HomPolyExpr.one(expr.n, expr.m, expr.ell, expr.r)
    for e, c in enumerate(coeffs):
        if e:
            power = glue(power, expr)
        if c:
            result = result + power.scaled(c)
    return result


def diagonal(n: int, m: int, ell: int, r: int, i: int, j: int) -> HomPolyExpr:
    return HomPolyExpr.of(n, m, diagonal_pattern(ell, r, i, j))


def restricted_sum(expr: HomPolyExpr, i: int, excluded: Iterable[int]) -> HomPolyExpr:
    """Sum over v in [n] minus {v_j : j in J} at label i, via the indicator p(sum_j D^{i,j})."""
    excluded = sorted(set(excluded))
    if i in excluded:
        raise ValueError("the summed label cannot be excluded")
    if any(not 0 <= j < expr.ell for j in excluded):
        raise IndexError("excluded label out of range")
    if not excluded:
        return unlabel(expr, i)
    n, m, ell, r = expr.n, expr.m, expr.ell, expr.r
    count = HomPolyExpr.zero(n, m, ell, r)
    for j in excluded:
        count = count + diagonal(n, m, ell, r, i, j)
    p = lagrange_coefficients([1] + [0] * ell)
    delta = apply_polynomial(p, count)
    return unlabel(glue(delta, expr), i)


def _structural_key(g: Sequence[int], pi) -> tuple:
    """Multiset over blocks of the multisets of term indices: determines the composite pattern."""
    return tuple(sorted(tuple(sorted(g[v] for v in block)) for block in pi.blocks))


def _composite(expr: HomPolyExpr, i: int, key: tuple) -> LabelledPattern:
    """Glue over blocks of the unlabelled (at i) glue of the block's terms."""
    pats = [lp for _, lp in expr.terms]
    blocks = []
    for block in key:
        acc = pats[block[0]]
        for t in block[1:]:
            acc = glue_patterns(acc, pats[t])
        blocks.append(unlabel_pattern(acc, i))
    out = blocks[0]
    for b in blocks[1:]:
        out = glue_patterns(out, b)
    return out


def product_expansion(expr: HomPolyExpr, i: int, term_cap: int = PRODUCT_TERM_CAP, n_cap: int = PRODUCT_N_CAP):
    """Coefficients (alpha_lambda / beta_lambda) * mu_pi accumulated per composite structure.

    Loops over compositions lambda, the orbit O_lambda of maps [n] -> T, and partitions pi of [n].
    """
    n = expr.n
    terms = expr.terms
    if n > n_cap:
        raise CapExceeded(f"product expansion is capped at n <= {n_cap} (combinatorial blow-up)")
    if len(terms) > term_cap:
        raise CapExceeded(f"product expansion is capped at {term_cap} distinct terms, got {len(terms)}")
    if not 0 <= i < expr.ell:
        raise IndexError(f"label index {i} out of range")
    tcount = len(terms)
    parts = enumerate_partitions(n)
    mu = {p: moebius(p) for p in parts}
    acc: dict[tuple, Fraction] = {}
    betas: dict[tuple[int, ...], int] = {}
    for lam in _compositions(n, tcount):
        alpha = Fraction(1)
        for t, count in enumerate(lam):
            alpha *= terms[t][0] ** count
        orbit = [g for g in iproduct(range(tcount), repeat=n) if all(g.count(t) == c for t, c in enumerate(lam))]
        members = set(orbit)
        f = orbit[0]
        # pairs (g, h) with g o h = f: each permutation h determines g = f o h^-1
        beta = sum(1 for h in permutations(range(n)) if tuple(f[h.index(v)] for v in range(n)) in members)
        betas[lam] = beta
        for g in orbit:
            for pi in parts:
                key = _structural_key(g, pi)
                acc[key] = acc.get(key, Fraction(0)) + alpha / beta * mu[pi]
    return {k: v for k, v in acc.items() if v != 0}, betas


def _compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    if parts == 0:
        return [()] if total == 0 else []
    if parts == 1:
        return [(total,)]
    return [(first,) + rest for first in range(total + 1) for rest in _compositions(total - first, parts - 1)]


def product(expr: HomPolyExpr, i: int, term_cap: int = PRODUCT_TERM_CAP) -> HomPolyExpr:
    """Point-wise product over v in [n] at label i, as a linear combination of composites."""
    expr = expr.normalized()
    n, m, ell, r = expr.n, expr.m, expr.ell, expr.r
    if not expr.terms:
        return HomPolyExpr.zero(n, m, ell - 1, r)
    coeffs, _ = product_expansion(expr, i, term_cap)
    terms = tuple((c, _composite(expr, i, key)) for key, c in coeffs.items())
    return HomPolyExpr(n, m, ell - 1, r, terms).normalized()


def restricted_product(expr: HomPolyExpr, i: int, excluded: Iterable[int], term_cap: int = PRODUCT_TERM_CAP) -> HomPolyExpr:
    """Product over v in [n] minus {v_j : j in J}, by recursion on |J| with a selector psi."""
    excluded = sorted(set(excluded))
    if i in excluded:
        raise ValueError("the multiplied label cannot be excluded")
    if any(not 0 <= j < expr.ell for j in excluded):
        raise IndexError("excluded label out of range")
    if not excluded:
        return product(expr, i, term_cap)
    n, m, ell, r = expr.n, expr.m, expr.ell, expr.r
    j, rest = excluded[-1], excluded[:-1]
    # the recursion adds one diagonal term per excluded label
    cap = term_cap + 1
    base = restricted_product(expr, i, rest, cap)
    shifted = restricted_product(expr + diagonal(n, m, ell, r, i, j), i, rest, cap)
    # psi = [v_j in {v_j' : j' in J'}] on the (ell-1)-label side
    count = HomPolyExpr.zero(n, m, ell, r)
    for jp in rest:
        count = count + diagonal(n, m, ell, r, jp, j)
    count = unlabel(count, i).scaled(Fraction(1, n))
    psi = apply_polynomial(lagrange_coefficients([0] + [1] * ell), count)
    one = HomPolyExpr.one(n, m, ell - 1, r)
    return glue(psi, base) + glue(one - psi, shifted - base)


# --------------------------------------------------------------------------- reference semantics


def restricted_sum_direct(table: dict, n: int, i: int, excluded: Sequence[int]) -> dict:
    """Reference: sum over admissible v of table[(v[i/v], w)], keyed by (v without i, w)."""
    out: dict = {}
    for (v, w), _ in table.items():
        key = (v[:i] + v[i + 1:], w)
        if key in out:
            continue
        banned = {v[j] for j in excluded}
        out[key] = sum(
            (table[(v[:i] + (x,) + v[i + 1:], w)] for x in range(n) if x not in banned), Fraction(0)
        )
    return out


def restricted_product_direct(table: dict, n: int, i: int, excluded: Sequence[int]) -> dict:
    out: dict = {}
    for (v, w), _ in table.items():
        key = (v[:i] + v[i + 1:], w)
        if key in out:
            continue
        banned = {v[j] for j in excluded}
        acc = Fraction(1)
        for x in range(n):
            if x not in banned:
                acc *= table[(v[:i] + (x,) + v[i + 1:], w)]
        out[key] = acc
    return out


def drop_label_table(table: dict, i: int) -> dict:
    """Re-key a table whose value does not depend on label i (sanity helper)."""
    return {(v[:i] + v[i + 1:], w): val for (v, w), val in table.items()}


# --------------------------------------------------------------------------- random instances


def random_labelled_pattern(rng, ell: int, r: int, max_extra: int = 2, edge_prob: float = 0.5) -> LabelledPattern:
    """Small random pattern; labels may coincide and unlabelled vertices are added at random."""
    left = max(1, rng.randint(0, ell) + rng.randint(0, max_extra)) if ell or max_extra else 0
    right = max(1, rng.randint(0, r) + rng.randint(0, max_extra)) if r or max_extra else 0
    edges = tuple(
        (a, b, rng.choice((1, 1, 2)))
        for a in range(left)
        for b in range(right)
        if rng.random() < edge_prob
    )
    base = BipartitePattern(left, right, edges)
    lp = LabelledPattern(
        base,
        tuple(rng.randrange(left) for _ in range(ell)),
        tuple(rng.randrange(right) for _ in range(r)),
    )
    return with_single_bag(lp)


def random_expression(rng, n: int, m: int, ell: int, r: int, max_terms: int = 3) -> HomPolyExpr:
    terms = tuple(
        (Fraction(rng.choice((-3, -2, -1, 1, 2, 3)), rng.randint(1, 3)), random_labelled_pattern(rng, ell, r))
        for _ in range(rng.randint(1, max_terms))
    )
    return HomPolyExpr(n, m, ell, r, terms)
