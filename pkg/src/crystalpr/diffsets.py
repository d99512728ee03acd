"""Difference sets and multisets of supports, collisions, and sampling experiments.

The difference set of a support S lives in the quotient of the group by
negation: it is the set of reflection classes of pairwise differences, and it
equals the support of the periodic autocorrelation of a generic signal carried
by S.  The multiset refines it by counting unordered pairs {i, j} (pairs with
i = j all land in class 0, which therefore has multiplicity K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .groups import AbelianGroup, ReflectionClass, SupportSet
from .rng import rng_id, substream


@dataclass(frozen=True)
class DifferenceSet:
    group: AbelianGroup
    classes: frozenset[ReflectionClass]

    @property
    def cardinality(self) -> int:
        return len(self.classes)

    def representatives(self) -> list:
        return sorted(c.representative for c in self.classes)

    def __repr__(self) -> str:
        reps = self.representatives()
        if self.group.rank == 1:
            return "{" + ",".join(str(r[0]) for r in reps) + "}"
        return "{" + ",".join(str(r) for r in reps) + "}"


@dataclass(frozen=True)
class DifferenceMultiset:
    group: AbelianGroup
    multiplicities: tuple[tuple[ReflectionClass, int], ...]

    def as_dict(self) -> dict[ReflectionClass, int]:
        return dict(self.multiplicities)

    @property
    def total(self) -> int:
        return sum(m for _, m in self.multiplicities)


def difference_set(s: SupportSet) -> DifferenceSet:
    """Reflection classes of all pairwise differences of s (always contains 0)."""
    if s.K == 0:
        raise ValueError("difference set of an empty support is undefined")
    g = s.group
    classes = {g.reflection_class(g.sub(b, a)) for a in s.elements for b in s.elements}
    return DifferenceSet(g, frozenset(classes))


def difference_multiset(s: SupportSet) -> DifferenceMultiset:
    """Counts of unordered pairs {i, j} per difference class (i = j included)."""
    if s.K == 0:
        raise ValueError("difference multiset of an empty support is undefined")
    g = s.group
    counts: dict[ReflectionClass, int] = {g.reflection_class(g.zero): s.K}
    for a, b in combinations(s.elements, 2):
        c = g.reflection_class(g.sub(b, a))
        counts[c] = counts.get(c, 0) + 1
    items = tuple(sorted(counts.items(), key=lambda kv: kv[0]))
    return DifferenceMultiset(g, items)


def collision_count(s: SupportSet) -> int:
    """Sum over nonzero classes of (multiplicity - 1), clipped at zero."""
    zero = s.group.reflection_class(s.group.zero)
    return sum(
        max(m - 1, 0)
        for c, m in difference_multiset(s).multiplicities
        if c != zero
    )


def is_collision_free(s: SupportSet) -> bool:
    return collision_count(s) == 0


def arithmetic_progression(s: SupportSet) -> tuple[int, int] | None:
    """Detect S = {c0 + l*d mod N : l = 0..K-1} on a cyclic group.

    Returns (c0, d) with d normalized into [1, floor(N/2)] (smaller d wins
    ties), or None.  Detection is exhaustive over d and starting points in S.
    """
    if s.group.rank != 1:
        raise ValueError("arithmetic progression detection requires a single cyclic factor")
    n = s.group.order
    elems = tuple(a[0] for a in s.elements)
    k = len(elems)
    target = set(elems)
    if k == 1:
        return (elems[0], 1 if n > 1 else 0)
    for d in range(1, n // 2 + 1):
        for c0 in elems:
            prog = {(c0 + l * d) % n for l in range(k)}
            if len(prog) == k and prog == target:
                return (c0, d)
    return None


def sample_support(group: AbelianGroup, k: int, rng: np.random.Generator) -> SupportSet:
    """Uniform draw over K-element subsets of the group."""
    if k > group.order:
        raise ValueError(f"K={k} exceeds the group order {group.order}")
    idx = rng.choice(group.order, size=k, replace=False)
    return SupportSet.from_indices(group, sorted(int(i) for i in idx))


def _diffset_size_1d(n: int, idx: np.ndarray) -> int:
    d = (idx[:, None] - idx[None, :]) % n
    return len(np.unique(np.minimum(d, n - d)))


def _collisions_1d(n: int, idx: np.ndarray) -> int:
    i, j = np.triu_indices(len(idx), k=1)
    d = (idx[j] - idx[i]) % n
    classes = np.minimum(d, n - d)
    _, counts = np.unique(classes, return_counts=True)
    return int(np.sum(counts - 1))


@dataclass
class HistogramExperiment:
    N: int
    K: int
    trials: int
    seed: int
    rng: str
    counts: dict[int, int] = field(default_factory=dict)
    violations: int = 0  # trials with |S-S| <= K

    def metadata(self) -> dict:
        return {"N": self.N, "K": self.K, "trials": self.trials, "seed": self.seed,
                "rng": self.rng, "violations": self.violations}

    def rows(self) -> list[tuple[int, int]]:
        return sorted(self.counts.items())


def diffset_histogram_experiment(n: int, k: int, trials: int, seed: int) -> HistogramExperiment:
    """Empirical distribution of |S-S| over uniformly sampled K-subsets of Z_N."""
    out = HistogramExperiment(n, k, trials, seed, rng_id(seed))
    for trial in range(trials):
        rng = substream(seed, trial)
        idx = np.sort(rng.choice(n, size=k, replace=False))
        size = _diffset_size_1d(n, idx)
        out.counts[size] = out.counts.get(size, 0) + 1
        if size <= k:
            out.violations += 1
    return out


@dataclass
class CollisionExperiment:
    N: int
    K: int
    trials: int
    seed: int
    rng: str
    collision_free_count: int = 0
    mean_collisions: float = 0.0

    def metadata(self) -> dict:
        return {"N": self.N, "K": self.K, "trials": self.trials, "seed": self.seed, "rng": self.rng}


def collision_experiment(n: int, k: int, trials: int, seed: int) -> CollisionExperiment:
    """Collision statistics (multiplicities above one) over sampled K-subsets."""
    out = CollisionExperiment(n, k, trials, seed, rng_id(seed))
    total = 0
    for trial in range(trials):
        rng = substream(seed, trial)
        idx = np.sort(rng.choice(n, size=k, replace=False))
        c = _collisions_1d(n, idx)
        total += c
        if c == 0:
            out.collision_free_count += 1
    out.mean_collisions = total / trials if trials else 0.0
    return out


@dataclass
class KempermanResult:
    N: int
    k_max: int
    holds: bool
    # violating subsets as (K, subset, |S-S|, is_arithmetic_progression)
    counterexamples: list[tuple[int, tuple[int, ...], int, bool]]


def prime_kemperman_check(n: int, k_max: int | None = None) -> KempermanResult:
    """Exhaustively test `|S-S| <= |S|  iff  S is an arithmetic progression` on Z_n.

    n must prime.  The equivalence is checked for every subset of every size
    2 <= K <= k_max (default floor(n/2)+1).  Note the boundary size
    K = floor(n/2)+1 admits counterexamples for n >= 7: there every S trivially
    has |S-S| <= K because only floor(n/2)+1 reflection classes exist, while
    most such S are not progressions.  On K <= floor(n/2) the equivalence is a
    theorem (Vosper-type sumset structure) and the check passes.
    """
    if n < 2 or any(n % p == 0 for p in range(2, int(math.isqrt(n)) + 1)):
        raise ValueError(f"N={n} is not prime")
    if k_max is None:
        k_max = n // 2 + 1
    group = AbelianGroup(n)
    bad: list[tuple[int, tuple[int, ...], int, bool]] = []
    for k in range(2, k_max + 1):
        for combo in combinations(range(n), k):
            s = SupportSet.from_indices(group, combo)
            size = difference_set(s).cardinality
            small = size <= k
            ap = arithmetic_progression(s) is not None
            if small != ap:
                bad.append((k, combo, size, ap))
    return KempermanResult(n, k_max, not bad, bad)
