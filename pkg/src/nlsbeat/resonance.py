"""Exact integer arithmetic for resonant sextuples and cluster families.

A sextuple of Fourier modes (j1, j2, j3, l1, l2, l3) is *resonant* when it
conserves both the sum and the sum of squares,

    j1 + j2 + j3 == l1 + l2 + l3    and    j1^2 + j2^2 + j3^2 == l1^2 + l2^2 + l3^2,

and *nontrivial* when the two index multisets differ.  Around each center n
we use the four-mode cluster {n-2, n-1, n+1, n+2}.  The verification
operations below certify, by exhaustive enumeration, that a family of such
clusters is closed under nontrivial resonances: completing any three cluster
modes and one more cluster mode to a resonant sextuple never leaves the
family, and no nontrivial resonance straddles two clusters.

All arithmetic uses Python integers, so intermediate squares are exact at
any size; there is no silent wraparound anywhere in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterable, Optional, Sequence

from .errors import DomainError, OverflowGuardError

# Inputs whose squares we promise to handle exactly.  Python integers are
# unbounded, so this is a contract window rather than a hardware limit; the
# guard keeps pathological inputs from silently eating memory.
INT_GUARD = 2**127


def is_perfect_square(x: int) -> Optional[int]:
    """Return r >= 0 with r*r == x if x is a perfect square, else None.

    Raises OverflowGuardError when |x| exceeds the guaranteed window.
    """
    if abs(x) > INT_GUARD:
        raise OverflowGuardError(f"|{x}| exceeds the exactness guard 2**127")
    if x < 0:
        return None
    r = math.isqrt(x)
    return r if r * r == x else None


def pair_solutions(S: int, T: int) -> set[tuple[int, int]]:
    """All unordered integer pairs (p1, p2) with p1+p2 == S and p1^2+p2^2 == T.

    The pair solves X^2 - S X + (S^2 - T)/2 = 0, so it exists iff the
    discriminant 2T - S^2 is a perfect square of the same parity as S.
    The result has at most one element, returned with p1 <= p2.
    """
    disc = 2 * T - S * S
    if disc < 0:
        return set()
    r = is_perfect_square(disc)
    if r is None:
        return set()
    if (S + r) % 2:
        return set()
    return {((S - r) // 2, (S + r) // 2)}


def is_resonant(j: Sequence[int], l: Sequence[int]) -> tuple[bool, bool]:
    """Return (in_R, nontrivial) for the sextuple (j1,j2,j3,l1,l2,l3).

    ``in_R`` holds iff both conservation identities hold; ``nontrivial``
    additionally requires the index multisets to differ.
    """
    in_r = sum(j) == sum(l) and sum(x * x for x in j) == sum(x * x for x in l)
    return in_r, in_r and sorted(j) != sorted(l)


@dataclass(frozen=True)
class ResonantSextuple:
    """A resonant sextuple, stored with each triple sorted ascending."""

    j1: int
    j2: int
    j3: int
    l1: int
    l2: int
    l3: int

    @property
    def j(self) -> tuple[int, int, int]:
        return (self.j1, self.j2, self.j3)

    @property
    def l(self) -> tuple[int, int, int]:
        return (self.l1, self.l2, self.l3)

    @property
    def in_R(self) -> bool:
        return is_resonant(self.j, self.l)[0]

    @property
    def nontrivial(self) -> bool:
        return is_resonant(self.j, self.l)[1]

    def support(self) -> set[int]:
        return set(self.j) | set(self.l)


def _sextuple(js: Iterable[int], ls: Iterable[int]) -> ResonantSextuple:
    a, b, c = sorted(js)
    d, e, f = sorted(ls)
    return ResonantSextuple(a, b, c, d, e, f)


@dataclass(frozen=True)
class Cluster:
    """The four labeled modes around a center n: {n-2, n-1, n+1, n+2}."""

    n: int

    def __post_init__(self):
        if self.n < 3:
            raise DomainError(f"cluster center must be >= 3, got {self.n}")

    @property
    def a2(self) -> int:
        return self.n - 2

    @property
    def b1(self) -> int:
        return self.n - 1

    @property
    def a1(self) -> int:
        return self.n + 1

    @property
    def b2(self) -> int:
        return self.n + 2

    @property
    def members(self) -> tuple[int, int, int, int]:
        return (self.n - 2, self.n - 1, self.n + 1, self.n + 2)


def cluster(n: int) -> Cluster:
    """Build the four-mode cluster centered at n (requires n >= 3)."""
    return Cluster(n)


def growth_ok(prefix: Sequence[int], n_next: int) -> bool:
    """True iff appending n_next respects n1 >= 3 and n_{k+1} >= 12 n_k^2."""
    if not prefix:
        return n_next >= 3
    return n_next >= 12 * prefix[-1] ** 2


@dataclass(frozen=True)
class ClusterFamily:
    """An ordered family of clusters.

    The growth condition (n1 >= 3, n_{k+1} >= 12 n_k^2) and pairwise
    disjointness of members are the working hypothesis of the closure
    results.  Families violating them can still be constructed and checked
    -- the verifiers run on anything -- but they are flagged via
    ``within_hypothesis`` so downstream reports can carry the caveat.
    """

    clusters: tuple[Cluster, ...]

    def __post_init__(self):
        if not self.clusters:
            raise DomainError("a cluster family needs at least one cluster")

    @classmethod
    def from_centers(cls, centers: Iterable[int]) -> "ClusterFamily":
        return cls(tuple(cluster(n) for n in centers))

    @property
    def centers(self) -> tuple[int, ...]:
        return tuple(c.n for c in self.clusters)

    @property
    def modes(self) -> tuple[int, ...]:
        """Union of all members, sorted ascending."""
        out: set[int] = set()
        for c in self.clusters:
            out.update(c.members)
        return tuple(sorted(out))

    @property
    def within_hypothesis(self) -> bool:
        centers = self.centers
        if any(not growth_ok(list(centers[:i]), centers[i]) for i in range(len(centers))):
            return False
        total = sum(len(c.members) for c in self.clusters)
        return total == len(self.modes)


def closure_violations(family: ClusterFamily) -> list[ResonantSextuple]:
    """Nontrivial resonant completions that escape the family.

    Enumerates every multiset {j1, j2, j3} and every l1 drawn from the
    family's modes, completes the sextuple through ``pair_solutions`` with
    S = j1+j2+j3-l1 and T = j1^2+j2^2+j3^2-l1^2, and collects those whose
    completing pair is not entirely inside the family.  Completions with
    equal index multisets are degenerate (they carry no exchange) and are
    never counted.  An empty list certifies closure.
    """
    A = set(family.modes)
    ordered = family.modes
    seen: set[tuple] = set()
    out: list[ResonantSextuple] = []
    for j1, j2, j3 in combinations_with_replacement(ordered, 3):
        s3 = j1 + j2 + j3
        q3 = j1 * j1 + j2 * j2 + j3 * j3
        for l1 in ordered:
            for p1, p2 in pair_solutions(s3 - l1, q3 - l1 * l1):
                js = (j1, j2, j3)
                ls = tuple(sorted((l1, p1, p2)))
                if js == ls:
                    continue
                key = (js, ls)
                if key in seen:
                    continue
                seen.add(key)
                if p1 not in A or p2 not in A:
                    out.append(_sextuple(js, ls))
    out.sort(key=lambda s: (s.j, s.l))
    return out


def intra_cluster_check(family: ClusterFamily) -> list[ResonantSextuple]:
    """Nontrivial resonant sextuples inside the family spanning >= 2 clusters.

    All six entries are family modes; a sextuple "spans" when no single
    cluster contains its support.  Sextuples are deduplicated up to
    permutations within each triple and up to swapping the two triples.
    Must be empty for families satisfying the growth hypothesis.
    """
    member_sets = [set(c.members) for c in family.clusters]
    A = set(family.modes)
    ordered = family.modes
    seen: set[tuple] = set()
    out: list[ResonantSextuple] = []
    for j1, j2, j3 in combinations_with_replacement(ordered, 3):
        s3 = j1 + j2 + j3
        q3 = j1 * j1 + j2 * j2 + j3 * j3
        for l1 in ordered:
            for p1, p2 in pair_solutions(s3 - l1, q3 - l1 * l1):
                if p1 not in A or p2 not in A:
                    continue
                js = (j1, j2, j3)
                ls = tuple(sorted((l1, p1, p2)))
                if js == ls:
                    continue
                key = (js, ls) if js <= ls else (ls, js)
                if key in seen:
                    continue
                seen.add(key)
                support = set(js) | set(ls)
                if not any(support <= m for m in member_sets):
                    out.append(_sextuple(*key))
    out.sort(key=lambda s: (s.j, s.l))
    return out


def next_admissible(prefix: Sequence[int], search_cap: int) -> Optional[int]:
    """Smallest admissible next center, or None if none exists up to the cap.

    A candidate n starts at 12*(last prefix center)^2 (at 3 for an empty
    prefix) and is admissible when both verifiers come back empty on the
    extended family.  The search is a complete decision procedure for each
    candidate, so a returned center is certified, not merely heuristic.
    """
    lo = 3 if not prefix else 12 * prefix[-1] ** 2
    for n in range(lo, search_cap + 1):
        fam = ClusterFamily.from_centers(tuple(prefix) + (n,))
        if closure_violations(fam):
            continue
        if intra_cluster_check(fam):
            continue
        return n
    return None
