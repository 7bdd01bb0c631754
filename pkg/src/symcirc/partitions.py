"""Set partitions of small ground sets and the Möbius function of the partition lattice."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import factorial, prod
from typing import Mapping, Sequence

PARTITION_CAP = 12


class CapExceeded(ValueError):
    """Raised when an exhaustive enumeration would exceed its configured cap."""


@dataclass(frozen=True)
class SetPartition:
    """A partition of ``{0, ..., size-1}``.

    Blocks are stored sorted internally and ordered by their minimum element,
    so two equal partitions always compare and hash equal.
    """

    size: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        blocks = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0] if b else -1))
        seen: set[int] = set()
        for block in blocks:
            if not block:
                raise ValueError("empty block")
            for x in block:
                if not 0 <= x < self.size:
                    raise ValueError(f"element {x} outside ground set of size {self.size}")
                if x in seen:
                    raise ValueError(f"element {x} occurs in two blocks")
                seen.add(x)
        if len(seen) != self.size:
            raise ValueError("blocks do not cover the ground set")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "SetPartition":
        """Build from a block label per element (elements with equal labels share a block)."""
        groups: dict[int, list[int]] = {}
        for x, lab in enumerate(labels):
            groups.setdefault(lab, []).append(x)
        return cls(len(labels), tuple(tuple(g) for g in groups.values()))

    @classmethod
    def discrete(cls, size: int) -> "SetPartition":
        return cls(size, tuple((x,) for x in range(size)))

    @classmethod
    def indiscrete(cls, size: int) -> "SetPartition":
        return cls(size, (tuple(range(size)),) if size else ())

    def __len__(self) -> int:
        return len(self.blocks)

    def block_index(self) -> tuple[int, ...]:
        """Index of the block containing each element."""
        out = [0] * self.size
        for idx, block in enumerate(self.blocks):
            for x in block:
                out[x] = idx
        return tuple(out)

    def refines(self, other: "SetPartition") -> bool:
        """True if every block of ``self`` lies inside a block of ``other``."""
        if self.size != other.size:
            return False
        where = other.block_index()
        return all(len({where[x] for x in block}) == 1 for block in self.blocks)


def enumerate_partitions(ground_size: int, cap: int = PARTITION_CAP) -> list[SetPartition]:
    """All partitions of a ``ground_size``-element set, via restricted growth strings."""
    if ground_size < 0:
        raise ValueError("negative ground size")
    if ground_size > cap:
        raise CapExceeded(f"ground set of size {ground_size} exceeds the partition cap {cap}")
    out: list[SetPartition] = []

    def grow(prefix: list[int], top: int) -> None:
        if len(prefix) == ground_size:
            out.append(SetPartition.from_labels(prefix))
            return
        for label in range(top + 2):
            prefix.append(label)
            grow(prefix, max(top, label))
            prefix.pop()

    grow([], -1)
    return out


def moebius(partition: SetPartition) -> int:
    """Möbius value mu(bottom, partition) in the partition lattice (Frucht-Rota-Schützenberger)."""
    sign = -1 if (partition.size - len(partition)) % 2 else 1
    return sign * prod(factorial(len(b) - 1) for b in partition.blocks)


def moebius_by_recursion(partition: SetPartition) -> int:
    """Möbius value from the defining recursion mu(s,s)=1, mu(s,u) = -sum_{s<=t<u} mu(s,t).

    Exponential; used as an independent check of :func:`moebius`.
    """
    lattice = enumerate_partitions(partition.size)
    below = [p for p in lattice if p.refines(partition)]
    below.sort(key=len, reverse=True)  # finer partitions (more blocks) first
    mu: dict[SetPartition, int] = {}
    for p in below:
        if len(p) == partition.size:
            mu[p] = 1
        else:
            mu[p] = -sum(v for q, v in mu.items() if q != p and q.refines(p))
    return mu[partition]


def _compose(h: Sequence[int], partition: SetPartition) -> tuple[int, ...]:
    """The map a -> h(block of a) for a map h on the blocks."""
    where = partition.block_index()
    return tuple(h[where[a]] for a in range(partition.size))


def check_moebius_inversion(
    domain_size: int, codomain_size: int, table: Mapping[tuple[int, ...], object]
) -> bool:
    """Verify both map/injection inversion identities for a value table indexed by maps.

    ``table`` maps every tuple ``h`` in ``range(codomain_size) ** domain_size`` to a
    value. Checks

        sum_h p_h = sum_pi sum_{h injective on blocks} p_{h o pi}
        sum_{h injective} p_h = sum_pi mu_pi sum_{h on blocks} p_{h o pi}
    """
    if domain_size > 5 or codomain_size > 5:
        raise CapExceeded("inversion check is limited to sets of size at most 5")
    maps = list(product(range(codomain_size), repeat=domain_size))
    missing = [h for h in maps if h not in table]
    if missing:
        raise ValueError(f"value table is missing map {missing[0]}")

    def value(h: tuple[int, ...]) -> Fraction:
        return Fraction(table[h])  # type: ignore[arg-type]

    lattice = enumerate_partitions(domain_size)
    all_maps = sum((value(h) for h in maps), Fraction(0))
    by_injective_blocks = Fraction(0)
    injective = sum((value(h) for h in maps if len(set(h)) == len(h)), Fraction(0))
    by_moebius = Fraction(0)
    for pi in lattice:
        for h in product(range(codomain_size), repeat=len(pi)):
            term = value(_compose(h, pi))
            if len(set(h)) == len(h):
                by_injective_blocks += term
            by_moebius += moebius(pi) * term
    return all_maps == by_injective_blocks and injective == by_moebius
