"""The intrinsic symmetry group of the Fourier-magnitude map and its actions.

An element g = (phase, shift, reflect) acts on a signal by

    (g.x)[n] = phase * x[n - shift]                (reflect = False)
    (g.x)[n] = phase * conj(x[-(n - shift)])       (reflect = True)

so reflect is conjugate-reflection through the origin followed by the shift.
For real signals the phase is restricted to +-1.  The composition law of the
semidirect product (phase x A) |x Z_2 is

    g1 * g2 = (p1 * conj^{r1}(p2),  l1 + (-1)^{r1} l2,  r1 xor r2).

Every action here preserves the Fourier magnitude and the periodic
autocorrelation exactly.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass

import numpy as np

from .groups import AbelianGroup, Coords, Field, Signal, SupportSet


@dataclass(frozen=True)
class SymmetryElement:
    phase: complex
    shift: Coords
    reflect: bool

    def describe(self) -> dict:
        p = complex(self.phase)
        phase = p.real if abs(p.imag) == 0.0 else [p.real, p.imag]
        return {"phase": phase, "shift": list(self.shift), "reflect": self.reflect}


def identity(group: AbelianGroup) -> SymmetryElement:
    return SymmetryElement(1.0, group.zero, False)


def compose(group: AbelianGroup, g1: SymmetryElement, g2: SymmetryElement) -> SymmetryElement:
    phase = g1.phase * (np.conj(g2.phase) if g1.reflect else g2.phase)
    l2 = group.negate(g2.shift) if g1.reflect else group.reduce(g2.shift)
    return SymmetryElement(phase, group.add(g1.shift, l2), g1.reflect ^ g2.reflect)


def inverse(group: AbelianGroup, g: SymmetryElement) -> SymmetryElement:
    phase = g.phase if g.reflect else np.conj(g.phase)
    shift = group.reduce(g.shift) if g.reflect else group.negate(g.shift)
    return SymmetryElement(phase, shift, g.reflect)


def dihedral_elements(group: AbelianGroup) -> list[SymmetryElement]:
    """The 2|A| phase-free elements (all shifts, with and without reflection)."""
    return [
        SymmetryElement(1.0, shift, reflect)
        for reflect in (False, True)
        for shift in group.elements()
    ]


def group_elements(group: AbelianGroup, field: Field) -> list[SymmetryElement]:
    """The full finite symmetry group in the real case: 4|A| elements.

    For the complex field the phase factor is continuous; this returns the
    discrete skeleton with phase +-1 (callers for which the phase matters
    optimize it analytically, see relative_error).
    """
    return [
        SymmetryElement(sign, g.shift, g.reflect)
        for sign in (1.0, -1.0)
        for g in dihedral_elements(group)
    ]


def apply(g: SymmetryElement, x: Signal) -> Signal:
    """Act on a signal; pure permutation/sign/conjugation, no roundoff beyond phase."""
    grp = x.group
    if x.field is Field.REAL:
        p = complex(g.phase)
        if p.imag != 0.0 or abs(p.real) != 1.0:
            raise ValueError(f"phase {g.phase} is not +-1; invalid for a real signal")
        phase = p.real
    else:
        phase = complex(g.phase)
    # source index for output position n is (-1)^r (n - shift)
    src = grp.shift_perm(grp.negate(g.shift))
    if g.reflect:
        src = grp.negation_perm[src]
        vals = np.conj(x.values[src])
    else:
        vals = x.values[src]
    return Signal(grp, x.field, phase * vals)


def apply_to_support(group: AbelianGroup, g: SymmetryElement, s: SupportSet) -> SupportSet:
    """Image of a support under the dihedral part of g (phase ignored)."""
    sgn = -1 if g.reflect else 1
    return SupportSet(
        group,
        (group.add(g.shift, tuple(sgn * c for c in a)) for a in s.elements),
    )


def _orbit_index_tuples(group: AbelianGroup, idx_tuple: tuple[int, ...]):
    """All dihedral images of a support given as a sorted tuple of flat indices."""
    arr = np.array(idx_tuple, dtype=np.int64)
    neg = group.negation_perm
    for base in (arr, neg[arr]):
        coords = group.coords_matrix[base]
        for shift_idx in range(group.order):
            shifted = group._encode(coords + group.coords_matrix[shift_idx])
            yield tuple(sorted(int(i) for i in shifted))


def canonical_support(s: SupportSet) -> SupportSet:
    """Lexicographically least member of the dihedral orbit of s."""
    best = min(_orbit_index_tuples(s.group, s.indices()))
    return SupportSet.from_indices(s.group, best)


def are_equivalent_supports(s1: SupportSet, s2: SupportSet) -> tuple[bool, SymmetryElement | None]:
    """Whether s2 = g.s1 for a dihedral g; returns (flag, witness or None)."""
    if s1.group != s2.group:
        raise ValueError("supports live on different groups")
    if s1.K != s2.K:
        return False, None
    target = s2.elements
    for g in dihedral_elements(s1.group):
        if apply_to_support(s1.group, g, s1).elements == target:
            return True, g
    return False, None


class SupportEnumerationCap(RuntimeError):
    """Raised when C(order, K) exceeds the configured enumeration cap."""


def enumerate_support_classes(
    group: AbelianGroup, k: int, cap: int = 5_000_000
) -> list[SupportSet]:
    """One canonical representative per dihedral orbit of K-element supports.

    Representatives are the lexicographically least orbit members and are
    returned in sorted order.
    """
    import math

    total = math.comb(group.order, k)
    if total > cap:
        raise SupportEnumerationCap(
            f"C({group.order},{k}) = {total} exceeds the enumeration cap {cap}"
        )
    reps = []
    for combo in itertools.combinations(range(group.order), k):
        if min(_orbit_index_tuples(group, combo)) == combo:
            reps.append(SupportSet.from_indices(group, combo))
    return reps


def orbit_size(s: SupportSet) -> int:
    """Number of distinct dihedral images of s."""
    return len(set(_orbit_index_tuples(s.group, s.indices())))


@dataclass(frozen=True)
class Stabilizer:
    """Finite symmetries fixing a support subspace setwise.

    In the real case the listed elements carry phases +-1 (so the order matches
    counts like 2, 4, 8); in the complex case only phase-1 elements are listed
    and the free S^1 phase factor is implied.
    """

    support: SupportSet
    field: Field
    elements: tuple[SymmetryElement, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def to_json_dict(self) -> dict:
        return {
            "support": self.support.to_index_list(),
            "field": self.field.value,
            "elements": [g.describe() for g in self.elements],
        }


def stabilizer(s: SupportSet, field: Field = Field.REAL) -> Stabilizer:
    """All symmetry elements whose dihedral part fixes s as a set."""
    group = s.group
    fixers = [
        g for g in dihedral_elements(group)
        if apply_to_support(group, g, s).elements == s.elements
    ]
    if field is Field.REAL:
        elems = tuple(
            SymmetryElement(sign, g.shift, g.reflect)
            for sign in (1.0, -1.0)
            for g in fixers
        )
    else:
        elems = tuple(fixers)
    return Stabilizer(s, field, elems)


def relative_error(x_est: Signal, x0: Signal) -> tuple[float, SymmetryElement]:
    """Symmetry-aware squared relative error min_g ||g.x_est - x0||^2 / ||x0||^2.

    The minimum runs over the full intrinsic symmetry group; in the complex
    case the optimal phase per dihedral element is computed analytically as
    the phase of <x0, g.x_est>.
    """
    if x_est.group != x0.group or x_est.field != x0.field:
        raise ValueError("signals must share group and field")
    n0sq = float(np.vdot(x0.values, x0.values).real)
    if n0sq == 0.0:
        raise ValueError("reference signal is zero")
    nesq = float(np.vdot(x_est.values, x_est.values).real)
    best: tuple[float, SymmetryElement] | None = None
    for g in dihedral_elements(x_est.group):
        moved = apply(g, x_est).values
        inner = complex(np.vdot(x0.values, moved))
        if x_est.field is Field.REAL:
            # best sign is sign(<x0, g.x>)
            err = nesq + n0sq - 2.0 * abs(inner.real)
            phase = 1.0 if inner.real >= 0 else -1.0
        else:
            err = nesq + n0sq - 2.0 * abs(inner)
            phase = 1.0 if inner == 0 else cmath.exp(-1j * cmath.phase(inner))
        err = max(err, 0.0) / n0sq
        if best is None or err < best[0]:
            best = (err, SymmetryElement(phase, g.shift, g.reflect))
    return best
