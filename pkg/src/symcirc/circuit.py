"""Arithmetic circuits over the rationals with semantic gate keys.

Gates are stored in topological order (children before parents). ``ADD`` and
``MUL`` gates hold sorted ``(child, multiplicity)`` multisets. The symmetry
group is either ``symnm`` (independent row and column permutations) or
``symn`` (one permutation acting on rows and columns of a square matrix).
A gate key is ``(tag, support)`` where ``support`` is a tuple of host
vertices ``(0, i)`` for row i and ``(1, j)`` for column j.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import gmpy2
import numpy as np

from .graphs import WeightedHost, format_rational, parse_rational
from .partitions import CapExceeded

IN, CONST, VAR, ADD, MUL = "IN", "CONST", "VAR", "ADD", "MUL"
GROUPS = ("symnm", "symn")
EXACT_ORBIT_CAP = 8

HostVertex = tuple[int, int]
Key = tuple[str, tuple[HostVertex, ...]]
Gate = tuple[str, object]


class SymmetryViolation(ValueError):
    """A group element does not extend to a key-respecting circuit automorphism."""


class CircuitFormatError(ValueError):
    """Malformed circuit text."""


# --------------------------------------------------------------------------- circuits


class Circuit:
    """An immutable circuit; construct through :class:`Builder` or :func:`deserialize`."""

    def __init__(
        self,
        n: int,
        m: int,
        group: str,
        gates: Sequence[Gate],
        out: int,
        keys: Mapping[int, Sequence[Key]] | None = None,
    ) -> None:
        if group not in GROUPS:
            raise ValueError(f"unknown symmetry group {group!r}")
        if group == "symn" and n != m:
            raise ValueError("the diagonal group needs a square variable matrix")
        self.n, self.m, self.group = n, m, group
        self.gates: tuple[Gate, ...] = tuple(gates)
        self.out = out
        self.keys: dict[int, tuple[Key, ...]] = {g: tuple(ks) for g, ks in (keys or {}).items() if ks}
        self._index: dict[Gate, int] | None = None
        self._validate()

    def _validate(self) -> None:
        if not 0 <= self.out < len(self.gates):
            raise ValueError("output gate out of range")
        seen_inputs: set[tuple[int, int]] = set()
        parents = [0] * len(self.gates)
        for gid, (kind, data) in enumerate(self.gates):
            if kind == IN:
                i, j = data  # type: ignore[misc]
                if not (0 <= i < self.n and 0 <= j < self.m):
                    raise ValueError(f"input gate {gid} reads x[{i},{j}] outside {self.n}x{self.m}")
                if (i, j) in seen_inputs:
                    raise ValueError(f"variable x[{i},{j}] appears in two input gates")
                seen_inputs.add((i, j))
            elif kind in (ADD, MUL):
                for c, mult in data:  # type: ignore[union-attr]
                    if not 0 <= c < gid:
                        raise ValueError(f"gate {gid} has child {c} that is not earlier in topological order")
                    if mult < 1:
                        raise ValueError(f"gate {gid} has wire multiplicity {mult}")
                    parents[c] += 1
            elif kind not in (CONST, VAR):
                raise ValueError(f"unknown gate kind {kind!r}")
        sinks = [g for g, p in enumerate(parents) if p == 0]
        if sinks != [self.out]:
            raise ValueError(f"circuit must have the output as its only sink, found sinks {sinks[:5]}")
        owner: dict[Key, int] = {}
        for g, ks in self.keys.items():
            for key in ks:
                if key in owner and owner[key] != g:
                    raise ValueError(f"key {key} labels two gates")
                owner[key] = g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.n, self.m, self.group, self.gates, self.out, self.keys) == (
            other.n,
            other.m,
            other.group,
            other.gates,
            other.out,
            other.keys,
        )

    def __hash__(self) -> int:
        return hash((self.n, self.m, self.group, self.gates, self.out))

    def __len__(self) -> int:
        return len(self.gates)

    def __repr__(self) -> str:
        return f"Circuit(n={self.n}, m={self.m}, group={self.group}, gates={len(self.gates)}, size={size(self)})"

    @property
    def index(self) -> dict[Gate, int]:
        if self._index is None:
            self._index = {g: i for i, g in enumerate(self.gates)}
        return self._index

    def key_owner(self) -> dict[Key, int]:
        return {key: g for g, ks in self.keys.items() for key in ks}

    def var_names(self) -> list[str]:
        return [data for kind, data in self.gates if kind == VAR]  # type: ignore[misc]

    def input_gate(self, i: int, j: int) -> int | None:
        return self.index.get((IN, (i, j)))


def size(circuit: Circuit) -> int:
    """Number of gates plus number of wires counted with multiplicity."""
    wires = sum(mult for kind, data in circuit.gates if kind in (ADD, MUL) for _, mult in data)  # type: ignore[union-attr]
    return len(circuit.gates) + wires


def degree(circuit: Circuit) -> int:
    """Formal total degree in the host variables (VAR gates count as degree 1)."""
    deg: list[int] = []
    for kind, data in circuit.gates:
        if kind in (IN, VAR):
            deg.append(1)
        elif kind == CONST:
            deg.append(0)
        elif kind == ADD:
            deg.append(max(deg[c] for c, _ in data))  # type: ignore[union-attr]
        else:
            deg.append(sum(deg[c] * k for c, k in data))  # type: ignore[union-attr]
    return deg[circuit.out]


# --------------------------------------------------------------------------- builder


class Builder:
    """Hash-consing, constant-folding circuit builder."""

    def __init__(self, n: int, m: int, group: str = "symnm") -> None:
        self.n, self.m, self.group = n, m, group
        self.gates: list[Gate] = []
        self.index: dict[Gate, int] = {}
        self.keys: dict[int, list[Key]] = defaultdict(list)
        self.key_owner: dict[Key, int] = {}
        self._zero = self.const(0)
        self._one = self.const(1)

    def _intern(self, gate: Gate) -> int:
        gid = self.index.get(gate)
        if gid is None:
            gid = len(self.gates)
            self.gates.append(gate)
            self.index[gate] = gid
        return gid

    @property
    def zero(self) -> int:
        return self._zero

    @property
    def one(self) -> int:
        return self._one

    def inp(self, i: int, j: int) -> int:
        if not (0 <= i < self.n and 0 <= j < self.m):
            raise ValueError(f"x[{i},{j}] outside {self.n}x{self.m}")
        return self._intern((IN, (i, j)))

    def const(self, value: Fraction | int) -> int:
        return self._intern((CONST, Fraction(value)))

    def var(self, name: str) -> int:
        if not re.fullmatch(r"[A-Za-z_][\w.\[\],]*", name):
            raise ValueError(f"bad variable name {name!r}")
        return self._intern((VAR, name))

    def const_value(self, gid: int) -> Fraction | None:
        kind, data = self.gates[gid]
        return data if kind == CONST else None  # type: ignore[return-value]

    @staticmethod
    def _collect(children: Iterable[int | tuple[int, int]]) -> dict[int, int]:
        acc: dict[int, int] = defaultdict(int)
        for c in children:
            if isinstance(c, tuple):
                acc[c[0]] += c[1]
            else:
                acc[c] += 1
        return acc

    def add(self, children: Iterable[int | tuple[int, int]]) -> int:
        acc = self._collect(children)
        total = Fraction(0)
        rest: dict[int, int] = {}
        for c, k in acc.items():
            if k == 0:
                continue
            val = self.const_value(c)
            if val is not None:
                total += val * k
            else:
                rest[c] = k
        if total != 0:
            rest[self.const(total)] = 1
        if not rest:
            return self._zero
        if len(rest) == 1:
            ((c, k),) = rest.items()
            if k == 1:
                return c
        return self._intern((ADD, tuple(sorted(rest.items()))))

    def mul(self, children: Iterable[int | tuple[int, int]]) -> int:
        acc = self._collect(children)
        total = Fraction(1)
        rest: dict[int, int] = {}
        for c, k in acc.items():
            if k == 0:
                continue
            val = self.const_value(c)
            if val is not None:
                total *= val**k
            else:
                rest[c] = k
        if total == 0:
            return self._zero
        if total != 1:
            rest[self.const(total)] = 1
        if not rest:
            return self.const(total)
        if len(rest) == 1:
            ((c, k),) = rest.items()
            if k == 1:
                return c
        return self._intern((MUL, tuple(sorted(rest.items()))))

    def scale(self, coeff: Fraction | int, gid: int) -> int:
        return self.mul([self.const(coeff), gid])

    def linear_combination(self, terms: Iterable[tuple[Fraction | int, int]]) -> int:
        """Sum of coeff * gate, merging repeated gates."""
        acc: dict[int, Fraction] = defaultdict(Fraction)
        for coeff, gid in terms:
            acc[gid] += Fraction(coeff)
        return self.add([self.scale(c, g) for g, c in acc.items() if c != 0])

    def power(self, gid: int, exponent: int) -> int:
        if exponent == 0:
            return self._one
        return self.mul([(gid, exponent)])

    def set_key(self, gid: int, tag: str, support: Sequence[HostVertex]) -> Key:
        """Attach a key; a key already owned by a different gate gets a numbered alias tag."""
        if not re.fullmatch(r"[^\s]+", tag):
            raise ValueError(f"key tag {tag!r} must be a single token")
        key: Key = (tag, tuple(tuple(v) for v in support))  # type: ignore[misc]
        owner = self.key_owner.get(key)
        if owner == gid:
            return key
        if owner is not None:
            raise ValueError(f"key {key} already labels gate {owner}")
        self.key_owner[key] = gid
        self.keys[gid].append(key)
        return key

    def import_circuit(
        self,
        circuit: Circuit,
        substitute: Mapping[str, int] | None = None,
        key_suffix: str = "",
    ) -> int:
        """Copy ``circuit`` into this builder, replacing VAR gates by the given gates.

        Keys are copied; a key that now clashes with another gate is re-tagged with ``key_suffix``.
        """
        substitute = substitute or {}
        new: list[int] = []
        for kind, data in circuit.gates:
            if kind == IN:
                new.append(self.inp(*data))  # type: ignore[misc]
            elif kind == CONST:
                new.append(self.const(data))  # type: ignore[arg-type]
            elif kind == VAR:
                new.append(substitute[data] if data in substitute else self.var(data))  # type: ignore[index]
            elif kind == ADD:
                new.append(self.add([(new[c], k) for c, k in data]))  # type: ignore[union-attr]
            else:
                new.append(self.mul([(new[c], k) for c, k in data]))  # type: ignore[union-attr]
        for g, ks in circuit.keys.items():
            target = new[g]
            if self.const_value(target) is not None or self.gates[target][0] == VAR:
                continue
            for tag, support in ks:
                owner = self.key_owner.get((tag, support))
                if owner is None or owner == target:
                    self.set_key(target, tag, support)
                elif key_suffix:
                    alias = (tag + key_suffix, support)
                    if self.key_owner.get(alias) in (None, target):
                        self.set_key(target, *alias)
        return new[circuit.out]

    def build(self, out: int) -> Circuit:
        """Prune gates not feeding ``out``, renumber topologically and freeze."""
        live = {out}
        for gid in range(out, -1, -1):
            if gid in live:
                kind, data = self.gates[gid]
                if kind in (ADD, MUL):
                    live.update(c for c, _ in data)  # type: ignore[union-attr]
        order = sorted(live)
        renum = {g: i for i, g in enumerate(order)}
        gates: list[Gate] = []
        for g in order:
            kind, data = self.gates[g]
            if kind in (ADD, MUL):
                data = tuple(sorted((renum[c], k) for c, k in data))  # type: ignore[union-attr]
            gates.append((kind, data))
        keys = {renum[g]: tuple(ks) for g, ks in self.keys.items() if g in renum}
        return Circuit(self.n, self.m, self.group, gates, renum[out], keys)


# --------------------------------------------------------------------------- evaluation


def _mpq(x: Fraction | int) -> gmpy2.mpq:
    return gmpy2.mpq(x.numerator, x.denominator) if isinstance(x, Fraction) else gmpy2.mpq(x)


def _check_host(circuit: Circuit, host: WeightedHost) -> None:
    if (host.n, host.m) != (circuit.n, circuit.m):
        raise ValueError(f"host is {host.n}x{host.m}, circuit expects {circuit.n}x{circuit.m}")


def evaluate(
    circuit: Circuit, host: WeightedHost, assignment: Mapping[str, Fraction | int] | None = None
) -> Fraction:
    """Exact value of the circuit at a host; VAR gates take values from ``assignment``."""
    _check_host(circuit, host)
    assignment = assignment or {}
    entries = [[_mpq(x) for x in row] for row in host.entries]
    vals: list = []
    for kind, data in circuit.gates:
        if kind == IN:
            i, j = data  # type: ignore[misc]
            vals.append(entries[i][j])
        elif kind == CONST:
            vals.append(_mpq(data))  # type: ignore[arg-type]
        elif kind == VAR:
            if data not in assignment:
                raise ValueError(f"no value for variable {data}")
            vals.append(_mpq(Fraction(assignment[data])))  # type: ignore[index]
        elif kind == ADD:
            acc = gmpy2.mpq(0)
            for c, k in data:  # type: ignore[union-attr]
                acc += vals[c] * k if k != 1 else vals[c]
            vals.append(acc)
        else:
            acc = gmpy2.mpq(1)
            for c, k in data:  # type: ignore[union-attr]
                acc *= vals[c] ** k if k != 1 else vals[c]
            vals.append(acc)
    res = vals[circuit.out]
    return Fraction(int(res.numerator), int(res.denominator))


def evaluate_many(circuit: Circuit, hosts: Sequence[WeightedHost]) -> list[Fraction]:
    """Evaluate at several hosts at once (vectorised over hosts)."""
    if not hosts:
        return []
    for h in hosts:
        _check_host(circuit, h)
    if circuit.var_names():
        raise ValueError("circuit has free variables; use evaluate with an assignment")
    count = len(hosts)
    vals: list[np.ndarray] = []
    for kind, data in circuit.gates:
        if kind == IN:
            i, j = data  # type: ignore[misc]
            arr = np.empty(count, dtype=object)
            arr[:] = [_mpq(h.entries[i][j]) for h in hosts]
            vals.append(arr)
        elif kind == CONST:
            arr = np.empty(count, dtype=object)
            arr[:] = [_mpq(data)] * count  # type: ignore[list-item]
            vals.append(arr)
        elif kind == ADD:
            it = iter(data)  # type: ignore[call-overload]
            c, k = next(it)
            acc = vals[c] * k if k != 1 else vals[c].copy()
            for c, k in it:
                acc += vals[c] * k if k != 1 else vals[c]
            vals.append(acc)
        else:
            it = iter(data)  # type: ignore[call-overload]
            c, k = next(it)
            acc = vals[c] ** k if k != 1 else vals[c].copy()
            for c, k in it:
                acc *= vals[c] ** k if k != 1 else vals[c]
            vals.append(acc)
    return [Fraction(int(v.numerator), int(v.denominator)) for v in vals[circuit.out]]


# --------------------------------------------------------------------------- symmetry


def _map_vertex(v: HostVertex, pi: Sequence[int], sigma: Sequence[int]) -> HostVertex:
    side, idx = v
    return (0, pi[idx]) if side == 0 else (1, sigma[idx])


def _group_pair(circuit: Circuit, pi: Sequence[int], sigma: Sequence[int] | None) -> tuple[tuple[int, ...], tuple[int, ...]]:
    pi = tuple(pi)
    if circuit.group == "symn":
        if sigma is not None and tuple(sigma) != pi:
            raise ValueError("the diagonal group acts by one permutation on rows and columns")
        sigma = pi
    elif sigma is None:
        sigma = tuple(range(circuit.m))
    sigma = tuple(sigma)
    if sorted(pi) != list(range(circuit.n)) or sorted(sigma) != list(range(circuit.m)):
        raise ValueError("not a permutation of the right size")
    return pi, sigma


def apply_permutation(
    circuit: Circuit, pi: Sequence[int], sigma: Sequence[int] | None = None, check_keys: bool = True
) -> list[int]:
    """Extend (pi, sigma) to a gate bijection, or raise :class:`SymmetryViolation`.

    The image of each gate is found structurally; key equivariance is then checked.
    """
    pi, sigma = _group_pair(circuit, pi, sigma)
    index = circuit.index
    image: list[int] = []
    for gid, (kind, data) in enumerate(circuit.gates):
        if kind == IN:
            i, j = data  # type: ignore[misc]
            target = index.get((IN, (pi[i], sigma[j])))
            if target is None:
                raise SymmetryViolation(
                    f"gate {gid} reads x[{i},{j}] but no gate reads its image x[{pi[i]},{sigma[j]}]"
                )
        elif kind in (CONST, VAR):
            target = gid
        else:
            mapped = tuple(sorted((image[c], k) for c, k in data))  # type: ignore[union-attr]
            target = index.get((kind, mapped))
            if target is None:
                raise SymmetryViolation(f"gate {gid} ({kind}) has no image under the permutation")
        image.append(target)
    if len(set(image)) != len(image):
        raise SymmetryViolation("permutation does not induce a bijection on gates")
    if check_keys:
        for gid, ks in circuit.keys.items():
            target_keys = set(circuit.keys.get(image[gid], ()))
            for tag, support in ks:
                moved = (tag, tuple(_map_vertex(v, pi, sigma) for v in support))
                if moved not in target_keys:
                    raise SymmetryViolation(f"key {tag}{support} of gate {gid} is not carried to {moved}")
    return image


def generators(circuit: Circuit) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """One transposition and one full cycle per side (or simultaneous, for the diagonal group)."""
    n, m = circuit.n, circuit.m
    ident_n, ident_m = tuple(range(n)), tuple(range(m))

    def swap(size: int) -> tuple[int, ...]:
        p = list(range(size))
        p[0], p[1] = 1, 0
        return tuple(p)

    def cycle(size: int) -> tuple[int, ...]:
        return tuple((i + 1) % size for i in range(size))

    gens = []
    if circuit.group == "symn":
        if n >= 2:
            gens += [(swap(n), swap(n)), (cycle(n), cycle(n))]
        return gens
    if n >= 2:
        gens += [(swap(n), ident_m), (cycle(n), ident_m)]
    if m >= 2:
        gens += [(ident_n, swap(m)), (ident_n, cycle(m))]
    return gens


def verify_symmetry(circuit: Circuit) -> bool:
    """True if every generator extends to an automorphism; raises on a violation."""
    for pi, sigma in generators(circuit):
        apply_permutation(circuit, pi, sigma)
    return True


def derived_supports(circuit: Circuit) -> list[frozenset[HostVertex]]:
    """Per-gate support sets: the smallest key support, or the union over children for unkeyed gates."""
    sup: list[frozenset[HostVertex]] = []
    for gid, (kind, data) in enumerate(circuit.gates):
        ks = circuit.keys.get(gid)
        if ks:
            sup.append(min((frozenset(s) for _, s in ks), key=len))
        elif kind == IN:
            i, j = data  # type: ignore[misc]
            sup.append(frozenset({(0, i), (1, j)}) if circuit.group == "symnm" else frozenset({(0, i), (0, j)}))
        elif kind in (CONST, VAR):
            sup.append(frozenset())
        else:
            sup.append(frozenset().union(*(sup[c] for c, _ in data)))  # type: ignore[union-attr]
    return sup


def key_support_length(circuit: Circuit) -> int:
    """Longest key support tuple (entries counted with repetition)."""
    return max((len(s) for ks in circuit.keys.values() for _, s in ks), default=0)


@dataclass
class OrbitStats:
    mode: str
    max_sup: int
    bound: int
    max_orb: int | None = None
    orbit_sizes: list[int] | None = None
    minimal_supports: list[frozenset] | None = None
    supports_verified: bool | None = None
    unique_certified: list[bool] | None = None
    notes: list[str] = field(default_factory=list)


def _transposition_maps(circuit: Circuit) -> dict[tuple[int, int, int], list[int]]:
    """Gate maps of every transposition: key (side, a, b); side 0 rows, 1 columns (diagonal: side 0 only)."""
    maps = {}
    n, m = circuit.n, circuit.m
    for a in range(n):
        for b in range(a + 1, n):
            p = list(range(n))
            p[a], p[b] = b, a
            if circuit.group == "symn":
                maps[(0, a, b)] = apply_permutation(circuit, p, p, check_keys=False)
            else:
                maps[(0, a, b)] = apply_permutation(circuit, p, range(m), check_keys=False)
    if circuit.group == "symnm":
        for a in range(m):
            for b in range(a + 1, m):
                p = list(range(m))
                p[a], p[b] = b, a
                maps[(1, a, b)] = apply_permutation(circuit, range(n), p, check_keys=False)
    return maps


def orbit_stats(circuit: Circuit, mode: str = "annotated", cap: int = EXACT_ORBIT_CAP) -> OrbitStats:
    """Orbit and support statistics.

    ``annotated`` reads supports from keys. ``exact`` (n+m <= cap) computes
    true orbits under the full group from transposition maps, verifies that
    every key support is fixed by its pointwise stabiliser, and shrinks it
    greedily to an inclusion-minimal support.
    """
    sup = derived_supports(circuit)
    max_sup = max((len(s) for s in sup), default=0)
    points = circuit.n + circuit.m if circuit.group == "symnm" else circuit.n
    stats = OrbitStats(mode=mode, max_sup=max_sup, bound=points**max_sup)
    if mode == "annotated":
        return stats
    if mode != "exact":
        raise ValueError(f"unknown orbit mode {mode!r}")
    if circuit.n + circuit.m > cap:
        raise CapExceeded(f"exact orbit mode needs n+m <= {cap}, got {circuit.n + circuit.m}")
    maps = _transposition_maps(circuit)
    count = len(circuit.gates)
    parent = list(range(count))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for image in maps.values():
        for g, h in enumerate(image):
            rg, rh = find(g), find(h)
            if rg != rh:
                parent[rg] = rh
    comp_size: dict[int, int] = defaultdict(int)
    for g in range(count):
        comp_size[find(g)] += 1
    stats.orbit_sizes = [comp_size[find(g)] for g in range(count)]
    stats.max_orb = max(stats.orbit_sizes)

    # a set S supports g iff every transposition of two points outside S fixes g
    moved: list[list[tuple[HostVertex, HostVertex]]] = [[] for _ in range(count)]
    for (side, a, b), image in maps.items():
        for g in range(count):
            if image[g] != g:
                moved[g].append(((side, a), (side, b)))

    def supports(g: int, s: frozenset) -> bool:
        return all(u in s or v in s for u, v in moved[g])

    verified = True
    minimal: list[frozenset] = []
    unique: list[bool] = []
    for g in range(count):
        s = sup[g] if circuit.group == "symnm" else frozenset((0, i) for _, i in sup[g])
        if not supports(g, s):
            verified = False
            stats.notes.append(f"support of gate {g} is not fixed by its pointwise stabiliser")
        cur = set(s)
        for v in sorted(s):
            trial = frozenset(cur - {v})
            if supports(g, trial):
                cur.discard(v)
        cur_f = frozenset(cur)
        minimal.append(cur_f)
        left = sum(1 for side, _ in cur_f if side == 0)
        right = len(cur_f) - left
        if circuit.group == "symn":
            unique.append(left < circuit.n / 2)
        else:
            unique.append(left < circuit.n / 2 and right < circuit.m / 2)
    stats.minimal_supports = minimal
    stats.supports_verified = verified
    stats.unique_certified = unique
    if not all(unique):
        stats.notes.append("minimal support not certified unique for some gates")
    return stats


# --------------------------------------------------------------------------- text format


def _vertex_token(v: HostVertex) -> str:
    return ("L" if v[0] == 0 else "R") + str(v[1])


def _token_vertex(tok: str) -> HostVertex:
    if not re.fullmatch(r"[LR]\d+", tok):
        raise CircuitFormatError(f"bad support token {tok!r}")
    return (0 if tok[0] == "L" else 1, int(tok[1:]))


def serialize(circuit: Circuit) -> str:
    lines = [f"c circuit n={circuit.n} m={circuit.m} group={circuit.group} out={circuit.out}"]
    for gid, (kind, data) in enumerate(circuit.gates):
        if kind == IN:
            lines.append(f"g {gid} IN {data[0]} {data[1]}")  # type: ignore[index]
        elif kind == CONST:
            lines.append(f"g {gid} CONST {format_rational(data)}")  # type: ignore[arg-type]
        elif kind == VAR:
            lines.append(f"g {gid} VAR {data}")
        else:
            body = " ".join(f"{c}*{k}" for c, k in data)  # type: ignore[union-attr]
            lines.append(f"g {gid} {kind} {body}")
    for gid in sorted(circuit.keys):
        for tag, support in circuit.keys[gid]:
            lines.append(" ".join(["k", str(gid), tag] + [_vertex_token(v) for v in support]))
    return "\n".join(lines) + "\n"


def deserialize(text: str) -> Circuit:
    """Parse the line format; gates may appear in any order and are re-sorted topologically."""
    header = None
    raw: dict[int, tuple[str, object]] = {}
    keys: dict[int, list[Key]] = defaultdict(list)
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        try:
            if parts[0] == "c":
                if len(parts) >= 2 and parts[1] == "circuit":
                    fields = dict(p.split("=", 1) for p in parts[2:])
                    header = (int(fields["n"]), int(fields["m"]), fields["group"], int(fields["out"]))
                continue
            if parts[0] == "g":
                gid, kind = int(parts[1]), parts[2]
                if gid in raw:
                    raise CircuitFormatError(f"gate {gid} defined twice")
                if kind == IN:
                    if len(parts) != 5:
                        raise CircuitFormatError("IN needs two indices")
                    raw[gid] = (IN, (int(parts[3]), int(parts[4])))
                elif kind == CONST:
                    if len(parts) != 4:
                        raise CircuitFormatError("CONST needs one value")
                    raw[gid] = (CONST, parse_rational(parts[3]))
                elif kind == VAR:
                    raw[gid] = (VAR, parts[3])
                elif kind in (ADD, MUL):
                    kids: dict[int, int] = defaultdict(int)
                    for tok in parts[3:]:
                        c, _, k = tok.partition("*")
                        kids[int(c)] += int(k) if k else 1
                    if not kids:
                        raise CircuitFormatError(f"{kind} gate without children")
                    raw[gid] = (kind, tuple(sorted(kids.items())))
                else:
                    raise CircuitFormatError(f"unknown gate kind {kind!r}")
            elif parts[0] == "k":
                keys[int(parts[1])].append((parts[2], tuple(_token_vertex(t) for t in parts[3:])))
            else:
                raise CircuitFormatError(f"unknown line type {parts[0]!r}")
        except (KeyError, IndexError, ValueError) as exc:
            raise CircuitFormatError(f"line {lineno}: {exc}") from exc
    if header is None:
        raise CircuitFormatError("missing 'c circuit' header")
    n, m, group, out = header
    if out not in raw:
        raise CircuitFormatError(f"output gate {out} is not defined")
    for gid, (kind, data) in raw.items():
        if kind in (ADD, MUL):
            for c, _ in data:  # type: ignore[union-attr]
                if c not in raw:
                    raise CircuitFormatError(f"gate {gid} references undefined gate {c}")
    for gid in keys:
        if gid not in raw:
            raise CircuitFormatError(f"key line references undefined gate {gid}")
    # Kahn's algorithm, smallest id first, so already-sorted files keep their numbering
    import heapq

    indeg = {g: 0 for g in raw}
    users: dict[int, list[int]] = defaultdict(list)
    for gid, (kind, data) in raw.items():
        if kind in (ADD, MUL):
            for c, _ in data:  # type: ignore[union-attr]
                indeg[gid] += 1
                users[c].append(gid)
    heap = [g for g, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order: list[int] = []
    while heap:
        g = heapq.heappop(heap)
        order.append(g)
        for u in users[g]:
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(heap, u)
    if len(order) != len(raw):
        raise CircuitFormatError("circuit contains a cycle")
    renum = {g: i for i, g in enumerate(order)}
    gates: list[Gate] = []
    for g in order:
        kind, data = raw[g]
        if kind in (ADD, MUL):
            data = tuple(sorted((renum[c], k) for c, k in data))  # type: ignore[union-attr]
        gates.append((kind, data))
    try:
        return Circuit(n, m, group, gates, renum[out], {renum[g]: ks for g, ks in keys.items()})
    except ValueError as exc:
        raise CircuitFormatError(str(exc)) from exc
