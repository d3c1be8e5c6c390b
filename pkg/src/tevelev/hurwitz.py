"""Local Hurwitz numbers: a small structural catalog and a brute-force oracle.

A query is three cycle types over d letters plus, for each of them, the cycle
lengths that carry a label.  Labelling a cycle singles it out: a query with
labels counts factorizations together with an assignment of the labels to
distinct cycles of the prescribed lengths.  Labelling a cycle of length one is
the same as marking one preimage.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Optional

from .core import DomainError

ORACLE_MAX_DEGREE = 7


class OracleRangeError(DomainError):
    """Brute force requested beyond the supported degree."""


def _partition(parts) -> tuple[int, ...]:
    return tuple(sorted((int(p) for p in parts), reverse=True))


@dataclass(frozen=True)
class LocalHurwitzQuery:
    d: int
    profiles: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]
    labelled: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]] = ((), (), ())

    def __post_init__(self):
        if self.d < 1:
            raise DomainError(f"degree must be positive, got {self.d}")
        if len(self.profiles) != 3 or len(self.labelled) != 3:
            raise DomainError("a local query has exactly three profiles")
        profs = tuple(_partition(p) for p in self.profiles)
        labs = tuple(_partition(p) for p in self.labelled)
        for p, lab in zip(profs, labs):
            if sum(p) != self.d or any(x < 1 for x in p):
                raise DomainError(f"{p} is not a partition of {self.d}")
            have, want = Counter(p), Counter(lab)
            if any(want[x] > have[x] for x in want):
                raise DomainError(f"labels {lab} do not fit the cycles of {p}")
        object.__setattr__(self, "profiles", profs)
        object.__setattr__(self, "labelled", labs)

    @classmethod
    def unmarked(cls, d, a, b, c) -> "LocalHurwitzQuery":
        return cls(d, (tuple(a), tuple(b), tuple(c)))

    def label_assignments(self) -> int:
        """Ways to put the labels on distinct cycles of the right lengths."""
        total = 1
        for p, lab in zip(self.profiles, self.labelled):
            have, want = Counter(p), Counter(lab)
            for length, k in want.items():
                total *= math.perm(have[length], k)
        return total


# ---------------------------------------------------------------- oracle

def _cycle_type(perm: tuple[int, ...]) -> tuple[int, ...]:
    seen = [False] * len(perm)
    lengths = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = perm[x]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def _representative(cycle_type: tuple[int, ...]) -> tuple[int, ...]:
    perm = []
    start = 0
    for length in cycle_type:
        block = list(range(start, start + length))
        perm.extend(block[1:] + block[:1])
        start += length
    return tuple(perm)


def _class_size(cycle_type: tuple[int, ...]) -> int:
    d = sum(cycle_type)
    denom = 1
    for length, k in Counter(cycle_type).items():
        denom *= length ** k * math.factorial(k)
    return math.factorial(d) // denom


def _compose(p, q):
    # (p*q)(x) = p(q(x))
    return tuple(p[q[x]] for x in range(len(q)))


def _inverse(p):
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def _transitive(d: int, gens) -> bool:
    reached = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for g in gens:
            y = g[x]
            if y not in reached:
                reached.add(y)
                stack.append(y)
    return len(reached) == d


def _cycles_by_length(perm) -> Counter:
    return Counter(_cycle_type(perm))


def local_hurwitz_oracle(q: LocalHurwitzQuery) -> Fraction:
    """Exhaustive count of transitive triples s1*s2*s3 = id, weighted by 1/d!.

    The first permutation is fixed to one representative of its class and the
    count multiplied by the class size; the second runs over the whole group.
    """
    d = q.d
    if d > ORACLE_MAX_DEGREE:
        raise OracleRangeError(f"oracle supports d <= {ORACLE_MAX_DEGREE}, got {d}")
    a, b, c = q.profiles
    s1 = _representative(a)
    hits = 0
    for s2 in permutations(range(d)):
        if _cycle_type(s2) != b:
            continue
        s3 = _inverse(_compose(s1, s2))
        if _cycle_type(s3) != c:
            continue
        if not _transitive(d, (s1, s2)):
            continue
        hits += 1
    return Fraction(hits * _class_size(a) * q.label_assignments(), math.factorial(d))


# ---------------------------------------------------------------- catalog

def _is_transposition(p: tuple[int, ...], d: int) -> bool:
    return d >= 2 and p == _partition((2,) + (1,) * (d - 2))


def _unlabelled_catalog(profiles: tuple, d: int) -> Optional[Fraction]:
    full = (d,)
    ones = (1,) * d
    for k in range(3):
        others = [profiles[x] for x in range(3) if x != k]
        # (d),(d),(1^d): one full cycle and its inverse
        if profiles[k] == ones and others == [full, full]:
            return Fraction(1, d)
        # a transposition splitting a full cycle into two
        if _is_transposition(profiles[k], d):
            for big, split in (others, others[::-1]):
                if big == full and len(split) == 2:
                    return Fraction(1, 2) if split[0] == split[1] else Fraction(1)
        # active edge through a vertex where sheets are cut or joined:
        # (d) or (d-1,1) against two hooks, balanced so the vertex has genus 0
        a, b = (_hook(p) for p in others)
        if a and b:
            if profiles[k] == full and a + b == d + 1:
                return Fraction(1)
            if d >= 3 and profiles[k] == (d - 1, 1) and a + b == d + 2:
                return Fraction(1)
    return None


def _hook(p: tuple[int, ...]) -> int:
    """x for a profile (x, 1, ..., 1) with x >= 2, else 0."""
    return p[0] if p[0] >= 2 and all(x == 1 for x in p[1:]) else 0


def catalog_value(q: LocalHurwitzQuery) -> Optional[Fraction]:
    """Closed form for the vertex shapes that occur in the constructions.

    Unlabelled values: 1/d for (d),(d),(1^d); 1/|Aut(a,b)| for a transposition
    splitting (d) into (a,b); 1 for (d) against hooks (a,1..),(b,1..) with
    a+b = d+1, and for (d-1,1) against hooks with a+b = d+2.  Labels multiply
    by the number of ways to place them.
    """
    base = _unlabelled_catalog(q.profiles, q.d)
    if base is None:
        return None
    return base * q.label_assignments()


def local_hurwitz(q: LocalHurwitzQuery) -> Fraction:
    value = catalog_value(q)
    if value is not None:
        return value
    return local_hurwitz_oracle(q)
