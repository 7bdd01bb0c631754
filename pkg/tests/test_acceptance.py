"""Acceptance battery: one test per criterion, exact (zero-tolerance) rational checks.

Each test records a PASS/FAIL line that conftest.py prints in the terminal summary.
"""

import random
import time
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations, product
from math import factorial

from symcirc.cfi import (
    atlas_graphs,
    cfi,
    cfi_lift_counts,
    cfi_pairs,
    complete_bipartite,
    counting_width_experiment,
    cycle_graph,
    exists_weak_oddomorphism,
    grid_graph,
    hom_count,
    is_isomorphism,
    isomorphic,
    k_wl_equivalent,
    named_base,
    treewidth,
    twist_isomorphism,
)
from symcirc.circuit import evaluate, evaluate_many, orbit_stats, verify_symmetry
from symcirc.graphs import (
    BipartitePattern,
    WeightedHost,
    all_01_hosts,
    enumerate_patterns,
    logical_cover_number,
)
from symcirc.hompoly import (
    eval_table,
    glue,
    product as hom_product,
    random_expression,
    restricted_product,
    restricted_product_direct,
    restricted_sum,
    restricted_sum_direct,
    swap,
    tensor,
    unlabel,
)
from symcirc.immanant import (
    brute_force_immanant,
    character_table,
    class_size,
    cofactor_determinant,
    integer_partitions,
    synth_immanant,
)
from symcirc.oracle import (
    all_01_values,
    brute_hom,
    brute_sub,
    brute_sub_all_01,
    expand_circuit,
    sub_polynomial,
)
from symcirc.synth import synth_biclique, synth_hom, synth_sub_cover, synth_sub_moebius

RESULTS: list[tuple[int, str, bool, str, float]] = []


def _record(num: int, title: str, ok: bool, detail: str, start: float) -> None:
    elapsed = time.perf_counter() - start
    RESULTS.append((num, title, ok, detail, elapsed))
    print(f"criterion {num} {'PASS' if ok else 'FAIL'}: {title} ({detail}; {elapsed:.1f}s)")


# --------------------------------------------------------------------------- 1 and 2: hom circuits


@lru_cache(maxsize=None)
def _hom_sweep():
    """Synthesize hom circuits for every pattern class (<= 6 vertices, norm <= 8) and 2 <= n, m <= 5."""
    rng = random.Random(2024)
    rows = []
    for f in enumerate_patterns(6, 8):
        for n in range(2, 6):
            for m in range(2, 6):
                rep = synth_hom(f, None, n, m)
                hosts = [WeightedHost.random(rng, n, m) for _ in range(20)]
                got = evaluate_many(rep.circuit, hosts)
                want = [brute_hom(f, h) for h in hosts]
                mismatches = sum(1 for a, b in zip(got, want) if a != b)
                orbit = orbit_stats(rep.circuit, "exact") if n + m <= 8 else None
                rows.append(
                    {
                        "pattern": f,
                        "n": n,
                        "m": m,
                        "mismatches": mismatches,
                        "size": rep.size,
                        "bound": rep.bound,
                        "conforming": rep.conforming,
                        "k": rep.stats["k"],
                        "max_sup": rep.max_sup,
                        "orbit": orbit,
                    }
                )
    return rows


def test_criterion_1_hom_circuit_soundness():
    start = time.perf_counter()
    rows = _hom_sweep()
    failures = sum(r["mismatches"] for r in rows)
    patterns = len({id(r["pattern"]) for r in rows})
    ok = failures == 0 and patterns == 2888
    _record(1, "hom circuits equal brute_hom", ok, f"{patterns} patterns x 16 sizes x 20 hosts, {failures} mismatches", start)
    assert ok


def test_criterion_2_size_and_support_bounds():
    start = time.perf_counter()
    rows = _hom_sweep()
    conforming = [r for r in rows if r["conforming"]]
    over_size = [r for r in conforming if r["size"] > r["bound"]]
    over_sup = [r for r in rows if r["max_sup"] > r["k"]]
    exact = [r for r in rows if r["orbit"] is not None]
    over_orbit = [r for r in exact if r["orbit"].max_orb > (r["n"] + r["m"]) ** r["orbit"].max_sup]
    unsupported = [r for r in exact if not r["orbit"].supports_verified]
    worst = max(r["size"] / r["bound"] for r in conforming)
    ok = (
        len(conforming) == len(rows)
        and not over_size
        and not over_sup
        and not over_orbit
        and not unsupported
    )
    detail = (
        f"{len(conforming)}/{len(rows)} conforming, worst size/bound {worst:.2e}, "
        f"{len(exact)} exact-orbit checks, violations size={len(over_size)} sup={len(over_sup)} "
        f"orbit={len(over_orbit)} support={len(unsupported)}"
    )
    _record(2, "size, support and orbit bounds", ok, detail, start)
    assert ok


# --------------------------------------------------------------------------- 3: Möbius subgraph circuits


def test_criterion_3_moebius_sub_equivalence():
    start = time.perf_counter()
    rng = random.Random(3)
    bad = []
    checked = exhaustive = 0
    for f in enumerate_patterns(5, 6, simple=True):
        for n in range(1, 5):
            for m in range(1, 5):
                c = synth_sub_moebius(f, n, m).circuit
                poly = expand_circuit(c)
                if poly != sub_polynomial(f, n, m):
                    bad.append((str(f), n, m, "polynomial"))
                if n * m <= 12:
                    exhaustive += 1
                    table = all_01_values(poly, n * m)
                    if (table != brute_sub_all_01(f, n, m)).any():
                        bad.append((str(f), n, m, "0/1 table"))
                hosts = [WeightedHost.random(rng, n, m) for _ in range(3)] + [WeightedHost.random_01(rng, n, m) for _ in range(3)]
                if evaluate_many(c, hosts) != [brute_sub(f, h) for h in hosts]:
                    bad.append((str(f), n, m, "evaluation"))
                checked += 1
    p3 = BipartitePattern(1, 2, ((0, 0, 1), (0, 1, 1)))
    k2_double = BipartitePattern(1, 1, ((0, 0, 2),))
    identity_ok = True
    for n in range(1, 5):
        for m in range(1, 5):
            lhs = expand_circuit(synth_sub_moebius(p3, n, m).circuit).scaled(2)
            rhs = expand_circuit(synth_hom(p3, None, n, m).circuit) - expand_circuit(synth_hom(k2_double, None, n, m).circuit)
            identity_ok &= lhs == rhs
    ok = not bad and identity_ok
    detail = f"{checked} (F, n, m) instances, {exhaustive} exhaustive 0/1 tables, {len(bad)} failures, P3 identity {'holds' if identity_ok else 'fails'}"
    _record(3, "Moebius subgraph circuits equal brute_sub", ok, detail, start)
    assert ok, bad[:5]


# --------------------------------------------------------------------------- 4: cover interpolation


def test_criterion_4_cover_interpolation():
    start = time.perf_counter()
    bad = []
    checked = 0
    for f in enumerate_patterns(5, 6, simple=True):
        for n in range(max(1, f.left_size), 5):
            for m in range(max(1, f.right_size), 5):
                if logical_cover_number(f, n, m) > 2:
                    continue
                cover = expand_circuit(synth_sub_cover(f, n, m).circuit)
                if cover != expand_circuit(synth_sub_moebius(f, n, m).circuit):
                    bad.append((str(f), n, m))
                checked += 1
    bicliques = 0
    for n in range(1, 5):
        for k in range(0, min(2, n) + 1):
            kk = BipartitePattern.complete(k, k)
            rep = synth_biclique("k", k, n)
            direct = expand_circuit(rep.circuit)
            if direct != sub_polynomial(kk, n, n) or (k and direct != expand_circuit(synth_sub_moebius(kk, n, n).circuit)):
                bad.append(("K_kk", k, n))
            rest = expand_circuit(synth_biclique("n-k", k, n).circuit)
            if rest != sub_polynomial(BipartitePattern.complete(n - k, n - k), n, n):
                bad.append(("K_n-k", k, n))
            if not verify_symmetry(rep.circuit):
                bad.append(("symmetry", k, n))
            bicliques += 2
    ok = not bad and checked > 0
    detail = f"{checked} cover instances with cc <= 2, {bicliques} biclique circuits, {len(bad)} failures"
    _record(4, "cover interpolation equals Moebius expansion", ok, detail, start)
    assert ok, bad[:5]


# --------------------------------------------------------------------------- 5: operation algebra


def _check_operation(name: str, rng: random.Random) -> bool:
    n, m = rng.randint(1, 4), rng.randint(1, 4)
    host = WeightedHost.random(rng, n, m, numerators=4, denominators=3)
    if name == "swap":
        phi = random_expression(rng, n, m, rng.randint(0, 2), rng.randint(0, 2))
        a, b = eval_table(phi, host), eval_table(swap(phi), host.transpose())
        return all(b[(w, v)] == x for (v, w), x in a.items())
    if name == "unlabel":
        ell = rng.randint(1, 2)
        phi = random_expression(rng, n, m, ell, rng.randint(0, 1))
        i = rng.randrange(ell)
        return eval_table(unlabel(phi, i), host) == restricted_sum_direct(eval_table(phi, host), n, i, ())
    if name == "restricted_sum":
        ell = rng.randint(2, 3)
        phi = random_expression(rng, n, m, ell, rng.randint(0, 1))
        i = rng.randrange(ell)
        others = [j for j in range(ell) if j != i]
        excluded = rng.sample(others, rng.randint(1, len(others)))
        return eval_table(restricted_sum(phi, i, excluded), host) == restricted_sum_direct(eval_table(phi, host), n, i, excluded)
    if name == "tensor":
        a = random_expression(rng, n, m, rng.randint(0, 1), rng.randint(0, 1))
        b = random_expression(rng, n, m, rng.randint(0, 1), rng.randint(0, 1))
        ta, tb, tt = eval_table(a, host), eval_table(b, host), eval_table(tensor(a, b), host)
        return all(tt[(v + v2, w + w2)] == x * y for (v, w), x in ta.items() for (v2, w2), y in tb.items())
    if name == "glue":
        ell, r = rng.randint(0, 2), rng.randint(0, 2)
        a, b = random_expression(rng, n, m, ell, r), random_expression(rng, n, m, ell, r)
        ta, tb, tg = eval_table(a, host), eval_table(b, host), eval_table(glue(a, b), host)
        return all(tg[t] == ta[t] * tb[t] for t in ta)
    if name == "product":
        ell = rng.randint(1, 2)
        phi = random_expression(rng, n, m, ell, rng.randint(0, 1))
        i = rng.randrange(ell)
        return eval_table(hom_product(phi, i), host) == restricted_product_direct(eval_table(phi, host), n, i, ())
    if name == "restricted_product":
        phi = random_expression(rng, n, m, 2, rng.randint(0, 1))
        i = rng.randrange(2)
        return eval_table(restricted_product(phi, i, [1 - i]), host) == restricted_product_direct(eval_table(phi, host), n, i, [1 - i])
    raise ValueError(name)


OPERATIONS = ("swap", "unlabel", "restricted_sum", "tensor", "glue", "product", "restricted_product")


def test_criterion_5_operation_algebra():
    start = time.perf_counter()
    rng = random.Random(5)
    failures = {}
    for name in OPERATIONS:
        failures[name] = sum(1 for _ in range(200) if not _check_operation(name, rng))
    ok = not any(failures.values())
    detail = "200 instances each, failures " + ", ".join(f"{k}={v}" for k, v in failures.items())
    _record(5, "operation algebra agrees with defining formulas", ok, detail, start)
    assert ok


# --------------------------------------------------------------------------- 6: CFI and WL battery


def test_criterion_6_cfi_wl_battery():
    start = time.perf_counter()
    problems = []
    # twist lemma: even twist <=> isomorphic <=> equal hom(base, .)
    twists_checked = vf2_checked = 0
    for base in atlas_graphs(6, connected=True):
        twists = list(product((0, 1), repeat=base.order))
        zero = (0,) * base.order
        counts = cfi_lift_counts(base, base, twists)
        g0 = cfi(base, zero).graph
        for u, hom_u in zip(twists, counts):
            even = sum(u) % 2 == 0
            if even:
                phi = twist_isomorphism(base, zero, u)
                if phi is None or not is_isomorphism(g0, cfi(base, u).graph, phi):
                    problems.append(("no isomorphism", base.edges, u))
            if (hom_u == counts[0]) != even:
                problems.append(("hom count", base.edges, u))
            if base.order <= 4:
                vf2_checked += 1
                if isomorphic(g0, cfi(base, u).graph) != even:
                    problems.append(("vf2", base.edges, u))
            twists_checked += 1
    # C^3-equivalence for treewidth-3 bases
    wl_checked = 0
    for base in (complete_bipartite(3, 3), grid_graph(3, 3)):
        if treewidth(base) < 3:
            problems.append(("treewidth", base.order))
        g0 = cfi(base, (0,) * base.order).graph
        for v in range(base.order):
            u = tuple(int(i == v) for i in range(base.order))
            wl_checked += 1
            if not k_wl_equivalent(g0, cfi(base, u).graph, 3).equivalent:
                problems.append(("C3", base.order, u))
    # monotonicity and strictness <=> weak oddomorphism, base C4
    c4 = cycle_graph(4)
    g0, g1 = cfi(c4, (0, 0, 0, 0)).graph, cfi(c4, (0, 0, 0, 1)).graph
    fs = [f for f in atlas_graphs(5) if f.order > 0]
    strict = 0
    for f in fs:
        a, b = hom_count(f, g0), hom_count(f, g1)
        witness = exists_weak_oddomorphism(f, c4)
        strict += a > b
        if a < b or (a > b) != (witness is not None):
            problems.append(("oddomorphism", f.edges, a, b))
    ok = not problems
    detail = (
        f"{twists_checked} twists ({vf2_checked} also by VF2), {wl_checked} C3 pairs, "
        f"{len(fs)} patterns vs C4 with {strict} strict, {len(problems)} problems"
    )
    _record(6, "CFI twist, C^k-equivalence and oddomorphism battery", ok, detail, start)
    assert ok, problems[:5]


# --------------------------------------------------------------------------- 7: counting width


def _hom_circuit_evaluator(patterns):
    cache = {}

    def value(g):
        host = g.biadjacency()
        out = []
        for f in patterns:
            key = (f, host.n, host.m)
            if key not in cache:
                cache[key] = synth_hom(f, None, host.n, host.m).circuit
            out.append(evaluate(cache[key], host))
        return tuple(out)

    return value


def _path(left, right, edges):
    return BipartitePattern(left, right, tuple((a, b, 1) for a, b in edges))


TREE_PATTERNS = (
    _path(1, 1, [(0, 0)]),
    _path(1, 2, [(0, 0), (0, 1)]),
    _path(2, 2, [(0, 0), (1, 0), (1, 1)]),
    _path(1, 3, [(0, 0), (0, 1), (0, 2)]),
    BipartitePattern(2, 2, ((0, 0, 2), (1, 1, 1), (1, 0, 1))),
)
TW2_PATTERNS = TREE_PATTERNS + (
    BipartitePattern.complete(2, 2),
    BipartitePattern.complete(2, 3),
    _path(3, 3, [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0)]),
    BipartitePattern(2, 3, ((0, 0, 1), (0, 1, 2), (1, 0, 1), (1, 1, 1), (1, 2, 1))),
)


def test_criterion_7_counting_width_property():
    start = time.perf_counter()
    rng = random.Random(7)
    summary = {}
    ok = True
    for k, bases, patterns in (
        (2, ["c4", "c6", "k2,3"], TREE_PATTERNS),
        (3, ["k3,3", "grid3x3"], TW2_PATTERNS),
    ):
        assert all(synth_hom(f, None, 2, 2).stats["k"] <= k for f in patterns)
        pairs = list(cfi_pairs([named_base(b) for b in bases], 20 if k == 2 else 30, rng))
        rows = counting_width_experiment(_hom_circuit_evaluator(patterns), k, pairs)
        not_equiv = sum(1 for r in rows if not r["ck_equivalent"])
        gaps = sum(1 for r in rows if r["gap"])
        summary[k] = (len(rows), not_equiv, gaps)
        ok &= len(rows) >= 50 and not_equiv == 0 and gaps == 0
    # control: a pattern of treewidth 2 separates the C^2-equivalent C4 pairs
    control = counting_width_experiment(
        _hom_circuit_evaluator([BipartitePattern.complete(2, 2)]), 2, cfi_pairs([named_base("c4")], 10, rng), check_equivalence=False
    )
    control_gaps = sum(1 for r in control if r["gap"])
    ok &= control_gaps == len(control)
    detail = "; ".join(f"k={k}: {n} pairs, {ne} not C^k-equivalent, {g} gaps" for k, (n, ne, g) in summary.items())
    detail += f"; control separates {control_gaps}/{len(control)}"
    _record(7, "T^k circuits agree on C^k-equivalent pairs", ok, detail, start)
    assert ok


# --------------------------------------------------------------------------- 8: immanants


def test_criterion_8_immanants():
    start = time.perf_counter()
    rng = random.Random(8)
    bad = []
    lambdas = 0
    for n in range(1, 6):
        for lam in integer_partitions(n):
            c = synth_immanant(lam).circuit
            lambdas += 1
            mats = [
                [[Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n)] for _ in range(n)] for _ in range(10)
            ]
            got = evaluate_many(c, [WeightedHost.from_rows(mat) for mat in mats])
            if got != [brute_force_immanant(lam, mat) for mat in mats]:
                bad.append(lam)
        if evaluate(synth_immanant((n,)).circuit, WeightedHost.constant(n, n)) != factorial(n):
            bad.append(("perm", n))
        det = synth_immanant((1,) * n).circuit
        if evaluate(det, WeightedHost.identity(n)) != 1:
            bad.append(("det", n))
        mat = [[Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n)] for _ in range(n)]
        if evaluate(det, WeightedHost.from_rows(mat)) != cofactor_determinant(mat):
            bad.append(("det-random", n))
    for n in range(1, 7):
        classes, table = character_table(n)
        sizes = [class_size(mu) for mu in classes]
        for a, b in product(range(len(table)), repeat=2):
            inner = sum(s * x * y for s, x, y in zip(sizes, table[a], table[b]))
            if inner != (factorial(n) if a == b else 0):
                bad.append(("orthogonality", n, a, b))
    ok = not bad
    detail = f"{lambdas} partitions x 10 matrices, character tables n <= 6, {len(bad)} failures"
    _record(8, "immanant circuits equal brute force", ok, detail, start)
    assert ok, bad[:5]


# --------------------------------------------------------------------------- 9: complement of a matching


def _matching_complement(n):
    return BipartitePattern(n, n, tuple((a, b, 1) for a in range(n) for b in range(n) if a != b))


def _expected(host, n):
    deg_rows = [sum(int(host[i, j]) for j in range(n)) for i in range(n)]
    deg_cols = [sum(int(host[i, j]) for i in range(n)) for j in range(n)]
    if min(deg_rows + deg_cols) < n - 1:
        return 0
    # missing entries must form a matching
    missing = [(i, j) for i in range(n) for j in range(n) if host[i, j] == 0]
    if len({i for i, _ in missing}) != len(missing) or len({j for _, j in missing}) != len(missing):
        return 0
    return factorial(sum(1 for d in deg_rows if d == n))


def _hosts_missing_a_matching(n):
    for size in range(n + 1):
        for rows in combinations(range(n), size):
            for cols in permutations(range(n), size):
                missing = set(zip(rows, cols))
                yield WeightedHost.from_rows([[0 if (i, j) in missing else 1 for j in range(n)] for i in range(n)])


def test_criterion_9_matching_complement():
    start = time.perf_counter()
    rng = random.Random(9)
    bad = []
    checked = 0
    for n in range(1, 5):
        f = _matching_complement(n)
        c = synth_sub_cover(f, n, n).circuit
        if n <= 3:
            hosts = list(all_01_hosts(n, n))
        else:
            hosts = list(_hosts_missing_a_matching(n)) + [WeightedHost.random_01(rng, n, n) for _ in range(100)]
        got = evaluate_many(c, hosts)
        for host, value in zip(hosts, got):
            want = _expected(host, n)
            if value != want or (n <= 3 and brute_sub(f, host) != want):
                bad.append((n, host.entries))
        checked += len(hosts)
    ok = not bad
    detail = f"{checked} simple hosts (exhaustive for n <= 3), {len(bad)} failures"
    _record(9, "complement-of-matching subgraph count is l!", ok, detail, start)
    assert ok, bad[:5]
