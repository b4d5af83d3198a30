"""Finite abelian groups: elements, characters, subgroups, automorphism
counts, Cohen-Lenstra masses, and surjection counting.

Groups are given by invariant factors d1 | d2 | ... | dk (each >= 2) and
elements are coordinate tuples. Everything here is exact integer or
rational arithmetic; the only floats are the complex character values and
Cohen-Lenstra masses.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import GroupTooLarge, InvalidFactor, NonDivisibleChain

# Desk-scale guard for element/subgroup enumeration.
DEFAULT_ENUMERATION_CAP = 4096

Element = tuple[int, ...]


@dataclass(frozen=True)
class AbelianGroup:
    """Finite abelian group in invariant-factor form."""

    invariant_factors: tuple[int, ...]

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    def __str__(self) -> str:
        if not self.invariant_factors:
            return "trivial"
        return " x ".join(f"Z/{d}" for d in self.invariant_factors)


def make_group(factors) -> AbelianGroup:
    """Build a group from invariant factors, validating the chain.

    Raises InvalidFactor unless every factor is an integer >= 2, and
    NonDivisibleChain unless d1 | d2 | ... | dk.
    """
    fs = tuple(int(d) for d in factors)
    for d in fs:
        if d < 2:
            raise InvalidFactor(f"invariant factor {d} is not >= 2")
    for a, b in zip(fs, fs[1:]):
        if b % a != 0:
            raise NonDivisibleChain(f"{a} does not divide {b}")
    return AbelianGroup(fs)


def trivial_group() -> AbelianGroup:
    return AbelianGroup(())


def identity(group: AbelianGroup) -> Element:
    return (0,) * group.rank


def add(group: AbelianGroup, a: Element, b: Element) -> Element:
    return tuple((x + y) % d for x, y, d in zip(a, b, group.invariant_factors))


def neg(group: AbelianGroup, a: Element) -> Element:
    return tuple((-x) % d for x, d in zip(a, group.invariant_factors))


def scalar_mul(group: AbelianGroup, k: int, a: Element) -> Element:
    return tuple((k * x) % d for x, d in zip(a, group.invariant_factors))


def element_order(group: AbelianGroup, a: Element) -> int:
    o = 1
    for x, d in zip(a, group.invariant_factors):
        o = math.lcm(o, d // math.gcd(x, d))
    return o


def _check_cap(group: AbelianGroup, cap: int) -> None:
    if group.order > cap:
        raise GroupTooLarge(f"|G| = {group.order} exceeds cap {cap}")


def elements(group: AbelianGroup, cap: int = DEFAULT_ENUMERATION_CAP) -> list[Element]:
    """All elements in lexicographic coordinate order (identity first)."""
    _check_cap(group, cap)
    return list(product(*(range(d) for d in group.invariant_factors)))


@dataclass(frozen=True)
class Character:
    """Character of an abelian group, stored as a frequency vector.

    rho(a) = exp(2*pi*i * sum_j freqs[j]*a[j]/moduli[j]); the phase is a
    Fraction, so kernel membership is an exact congruence.
    """

    moduli: tuple[int, ...]
    freqs: tuple[int, ...]

    def phase(self, a: Element) -> Fraction:
        t = Fraction(0)
        for c, x, d in zip(self.freqs, a, self.moduli):
            t += Fraction(c * x, d)
        return t % 1

    def __call__(self, a: Element) -> complex:
        return cmath.exp(2j * math.pi * float(self.phase(a)))

    def is_in_kernel(self, a: Element) -> bool:
        return self.phase(a) == 0

    @property
    def is_trivial(self) -> bool:
        return all(c == 0 for c in self.freqs)


def characters(group: AbelianGroup, cap: int = DEFAULT_ENUMERATION_CAP) -> list[Character]:
    """All |G| characters; the trivial character comes first."""
    _check_cap(group, cap)
    mods = group.invariant_factors
    return [Character(mods, f) for f in product(*(range(d) for d in mods))]


@lru_cache(maxsize=None)
def character_table(group: AbelianGroup) -> np.ndarray:
    """Complex table T[r, e] = rho_r(element e), rows/cols in enumeration order."""
    elems = elements(group)
    chars = characters(group)
    table = np.empty((len(chars), len(elems)), dtype=complex)
    for i, ch in enumerate(chars):
        for j, a in enumerate(elems):
            table[i, j] = ch(a)
    return table


@lru_cache(maxsize=None)
def element_index(group: AbelianGroup) -> dict[Element, int]:
    return {a: i for i, a in enumerate(elements(group))}


@lru_cache(maxsize=None)
def negation_index(group: AbelianGroup) -> np.ndarray:
    """neg_idx[i] = index of -a_i."""
    elems = elements(group)
    idx = element_index(group)
    return np.array([idx[neg(group, a)] for a in elems], dtype=np.int64)


@lru_cache(maxsize=None)
def addition_index(group: AbelianGroup) -> np.ndarray:
    """add_idx[i, j] = index of a_i + a_j."""
    elems = elements(group)
    idx = element_index(group)
    k = len(elems)
    table = np.empty((k, k), dtype=np.int64)
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            table[i, j] = idx[add(group, a, b)]
    return table


# ---------------------------------------------------------------------------
# p-group partitions, automorphism counts, Cohen-Lenstra masses


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PGroupPartition:
    """Abelian p-group as a partition: exponents lambda_1 >= lambda_2 >= ... >= 1."""

    prime: int
    parts: tuple[int, ...]

    def __post_init__(self):
        if not _is_prime(self.prime):
            raise InvalidFactor(f"{self.prime} is not prime")
        if any(x < 1 for x in self.parts):
            raise InvalidFactor("partition parts must be >= 1")
        if any(a < b for a, b in zip(self.parts, self.parts[1:])):
            raise InvalidFactor("partition parts must be nonincreasing")

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def order(self) -> int:
        return self.prime ** self.weight


def aut_order(part: PGroupPartition) -> int:
    """|Aut| of the abelian p-group with the given partition (Hillar-Rhea form)."""
    p = part.prime
    e = sorted(part.parts)  # ascending exponents
    n = len(e)
    if n == 0:
        return 1
    d = [max(l for l in range(n) if e[l] == e[k]) + 1 for k in range(n)]
    c = [min(l for l in range(n) if e[l] == e[k]) + 1 for k in range(n)]
    total = 1
    for k in range(n):
        total *= p ** d[k] - p**k
    for j in range(n):
        total *= (p ** e[j]) ** (n - d[j])
    for i in range(n):
        total *= (p ** (e[i] - 1)) ** (n - c[i] + 1)
    return total


def cl_mass(part: PGroupPartition, truncation_tol: float = 1e-12) -> float:
    """Cohen-Lenstra mass |Aut|^{-1} * prod_{j>=1} (1 - p^-j).

    The infinite product is truncated at J with 2*p^-J < truncation_tol,
    which bounds the dropped tail via prod_{j>J}(1-p^-j) >= 1 - 2*p^-J.
    """
    p = part.prime
    if truncation_tol <= 0:
        raise ValueError("truncation_tol must be positive")
    J = max(1, math.ceil(math.log(2.0 / truncation_tol) / math.log(p)))
    prod = 1.0
    for j in range(1, J + 1):
        prod *= 1.0 - p ** (-float(j))
    return prod / aut_order(part)


def sylow(group: AbelianGroup, p: int) -> PGroupPartition:
    """Partition of the Sylow p-subgroup (empty partition if p does not divide |G|)."""
    if not _is_prime(p):
        raise InvalidFactor(f"{p} is not prime")
    parts = []
    for d in group.invariant_factors:
        e = 0
        while d % p == 0:
            d //= p
            e += 1
        if e:
            parts.append(e)
    return PGroupPartition(p, tuple(sorted(parts, reverse=True)))


def partitions_up_to(max_weight: int) -> list[tuple[int, ...]]:
    """All integer partitions with weight <= max_weight, small weight first.

    Includes the empty partition; order is deterministic (weight, then lex).
    """
    out: list[tuple[int, ...]] = [()]
    for w in range(1, max_weight + 1):
        out.extend(_partitions_of(w))
    return out


def _partitions_of(w: int, cap: int | None = None) -> list[tuple[int, ...]]:
    if w == 0:
        return [()]
    cap = w if cap is None else min(cap, w)
    result = []
    for first in range(cap, 0, -1):
        for rest in _partitions_of(w - first, first):
            result.append((first,) + rest)
    return result


# ---------------------------------------------------------------------------
# Subgroups and surjection counting


@dataclass(frozen=True)
class Subgroup:
    """Subgroup of an ambient group: the member set plus its abstract type."""

    ambient: AbelianGroup
    members: frozenset[Element]
    invariant_factors: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.members)

    def as_group(self) -> AbelianGroup:
        return AbelianGroup(self.invariant_factors)

    @property
    def is_full(self) -> bool:
        return self.order == self.ambient.order


def subgroup_generated_by(group: AbelianGroup, gens) -> frozenset[Element]:
    """Closure of a generating set (elements of the ambient group)."""
    closed = {identity(group)}
    for g in gens:
        step = set()
        o = element_order(group, g)
        for s in closed:
            cur = s
            for _ in range(o):
                step.add(cur)
                cur = add(group, cur, g)
        closed = step
    return frozenset(closed)


def _subset_invariant_factors(group: AbelianGroup, members: frozenset[Element]) -> tuple[int, ...]:
    # Recover the abstract type from the element-order profile: for each
    # prime p the counts N_k = #{x : p^k x = 0} determine the conjugate
    # partition exactly (N_k is a power of p in an abelian group).
    order = len(members)
    if order == 1:
        return ()
    sylow_parts: dict[int, list[int]] = {}
    rem = order
    p = 2
    primes = []
    while rem > 1:
        if rem % p == 0:
            primes.append(p)
            while rem % p == 0:
                rem //= p
        p += 1 if p == 2 else 2
    for p in primes:
        p_power = 1
        o = order
        while o % p == 0:
            o //= p
            p_power *= p
        counts = [0]  # log_p N_0 = 0
        k = 1
        while True:
            n_k = sum(1 for x in members if all(c * p**k % d == 0 for c, d in zip(x, group.invariant_factors)))
            e, t = 0, 1
            while t < n_k:
                t *= p
                e += 1
            counts.append(e)
            if n_k == p_power:
                break
            k += 1
        conj = [counts[i + 1] - counts[i] for i in range(len(counts) - 1)]
        # conjugate partition -> partition
        parts = []
        for i, c in enumerate(conj):
            parts.extend([i + 1] * (c - (conj[i + 1] if i + 1 < len(conj) else 0)))
        sylow_parts[p] = sorted(parts, reverse=True)
    width = max(len(v) for v in sylow_parts.values())
    factors = []
    for pos in range(width):
        f = 1
        for p, parts in sylow_parts.items():
            if pos < len(parts):
                f *= p ** parts[pos]
        factors.append(f)
    # largest factor first by construction; invariant factors ascend
    return tuple(sorted(factors))


@lru_cache(maxsize=None)
def subgroups(group: AbelianGroup, cap: int = DEFAULT_ENUMERATION_CAP) -> tuple[Subgroup, ...]:
    """All subgroups, found by closure BFS; deterministic order.

    Sorted by (order, sorted member list). Raises GroupTooLarge above cap.
    """
    _check_cap(group, cap)
    elems = elements(group, cap)
    seen: set[frozenset[Element]] = {frozenset({identity(group)})}
    frontier = [frozenset({identity(group)})]
    while frontier:
        nxt = []
        for sub in frontier:
            for g in elems:
                if g in sub:
                    continue
                bigger = _extend_subgroup(group, sub, g)
                if bigger not in seen:
                    seen.add(bigger)
                    nxt.append(bigger)
        frontier = nxt
    ordered = sorted(seen, key=lambda s: (len(s), sorted(s)))
    return tuple(
        Subgroup(group, s, _subset_invariant_factors(group, s)) for s in ordered
    )


def _extend_subgroup(group: AbelianGroup, sub: frozenset[Element], g: Element) -> frozenset[Element]:
    # <sub, g> = { s + k g } since the group is abelian
    out = set()
    o = element_order(group, g)
    for s in sub:
        cur = s
        for _ in range(o):
            out.add(cur)
            cur = add(group, cur, g)
    return frozenset(out)


def hom_count(source: AbelianGroup, target: AbelianGroup) -> int:
    """|Hom(source, target)| = prod_{i,j} gcd(d_i, e_j)."""
    total = 1
    for d in source.invariant_factors:
        for e in target.invariant_factors:
            total *= math.gcd(d, e)
    return total


@lru_cache(maxsize=None)
def _sur_count_cached(source_factors: tuple[int, ...], target_factors: tuple[int, ...], cap: int) -> int:
    source = AbelianGroup(source_factors)
    target = AbelianGroup(target_factors)
    total = hom_count(source, target)
    for sub in subgroups(target, cap):
        if not sub.is_full:
            total -= _sur_count_cached(source_factors, sub.invariant_factors, cap)
    return total


def sur_count(source: AbelianGroup, target: AbelianGroup, cap: int = DEFAULT_ENUMERATION_CAP) -> int:
    """Number of surjective homomorphisms source ->> target.

    Inclusion-exclusion over the subgroup lattice of the target: every
    homomorphism surjects onto exactly one subgroup, so
    |Sur(H, G)| = |Hom(H, G)| - sum over proper subgroups S of |Sur(H, S)|.
    Only the target is enumerated; the source may be arbitrarily large.
    """
    _check_cap(target, cap)
    return _sur_count_cached(source.invariant_factors, target.invariant_factors, cap)
