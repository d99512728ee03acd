"""Finite abelian groups (products of cyclic groups), signals on them, and supports.

Conventions fixed here and relied on everywhere else:

* elements are coordinate tuples, one coordinate per cyclic factor, stored
  reduced modulo the factor's modulus;
* the flat index of an element is row-major (last coordinate fastest), so
  ``(1, 2)`` in ``Z_3 x Z_4`` has index ``1*4 + 2 = 6``;
* signal values are dense arrays of length ``group.order`` in that index order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

Coords = tuple[int, ...]


class Field(enum.Enum):
    """Scalar field of a signal."""

    REAL = "real"
    COMPLEX = "complex"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float64 if self is Field.REAL else np.complex128)


def _as_coords(group: "AbelianGroup", a) -> Coords:
    """Normalize an element given as an int (rank-1 groups only) or iterable."""
    if isinstance(a, (int, np.integer)):
        if group.rank != 1:
            raise ValueError(f"integer element only valid for rank-1 groups, not {group}")
        return (int(a) % group.moduli[0],)
    coords = tuple(int(c) for c in a)
    if len(coords) != group.rank:
        raise ValueError(f"element {coords} has {len(coords)} coordinates, expected {group.rank}")
    return tuple(c % n for c, n in zip(coords, group.moduli))


@dataclass(frozen=True)
class AbelianGroup:
    """Direct product Z_{N_1} x ... x Z_{N_M} with row-major flat indexing."""

    moduli: tuple[int, ...]

    def __init__(self, moduli: Iterable[int] | int):
        if isinstance(moduli, (int, np.integer)):
            moduli = (int(moduli),)
        mods = tuple(int(n) for n in moduli)
        if not mods or any(n < 1 for n in mods):
            raise ValueError(f"moduli must be a nonempty list of positive integers, got {mods}")
        object.__setattr__(self, "moduli", mods)

    def __repr__(self) -> str:
        return "Z" + "xZ".join(str(n) for n in self.moduli)

    @property
    def rank(self) -> int:
        return len(self.moduli)

    @cached_property
    def order(self) -> int:
        return math.prod(self.moduli)

    @cached_property
    def _strides(self) -> tuple[int, ...]:
        s = [1] * self.rank
        for j in range(self.rank - 2, -1, -1):
            s[j] = s[j + 1] * self.moduli[j + 1]
        return tuple(s)

    def reduce(self, a) -> Coords:
        return _as_coords(self, a)

    def index_of(self, a) -> int:
        """Row-major flat index of an element; inverse of element_of."""
        coords = _as_coords(self, a)
        return sum(c * s for c, s in zip(coords, self._strides))

    def element_of(self, idx: int) -> Coords:
        """Element with the given flat index in [0, order)."""
        idx = int(idx)
        if not 0 <= idx < self.order:
            raise ValueError(f"index {idx} out of range [0, {self.order})")
        coords = []
        for s in self._strides:
            c, idx = divmod(idx, s)
            coords.append(c)
        return tuple(coords)

    def add(self, a, b) -> Coords:
        a, b = _as_coords(self, a), _as_coords(self, b)
        return tuple((x + y) % n for x, y, n in zip(a, b, self.moduli))

    def sub(self, a, b) -> Coords:
        a, b = _as_coords(self, a), _as_coords(self, b)
        return tuple((x - y) % n for x, y, n in zip(a, b, self.moduli))

    def negate(self, a) -> Coords:
        a = _as_coords(self, a)
        return tuple((-x) % n for x, n in zip(a, self.moduli))

    @property
    def zero(self) -> Coords:
        return (0,) * self.rank

    def elements(self) -> Iterator[Coords]:
        for idx in range(self.order):
            yield self.element_of(idx)

    def reflection_class(self, a) -> "ReflectionClass":
        """Class of a under a ~ -a, represented by the lexicographic minimum."""
        a = _as_coords(self, a)
        return ReflectionClass(min(a, self.negate(a)))

    @cached_property
    def reflection_classes(self) -> tuple["ReflectionClass", ...]:
        """All reflection classes, sorted by representative."""
        reps = sorted({min(a, self.negate(a)) for a in self.elements()})
        return tuple(ReflectionClass(r) for r in reps)

    # --- cached index machinery used by the numeric modules ---

    @cached_property
    def coords_matrix(self) -> np.ndarray:
        """(order, rank) int array; row i is element_of(i). Read-only."""
        m = np.empty((self.order, self.rank), dtype=np.int64)
        idx = np.arange(self.order)
        for j, s in enumerate(self._strides):
            m[:, j] = (idx // s) % self.moduli[j]
        m.flags.writeable = False
        return m

    def _encode(self, coords: np.ndarray) -> np.ndarray:
        """Flat indices of an (..., rank) array of (possibly unreduced) coords."""
        mods = np.asarray(self.moduli, dtype=np.int64)
        strides = np.asarray(self._strides, dtype=np.int64)
        return (coords % mods) @ strides

    @cached_property
    def negation_perm(self) -> np.ndarray:
        """Permutation p with p[i] = index_of(-element_of(i)). Read-only."""
        p = self._encode(-self.coords_matrix)
        p.flags.writeable = False
        return p

    def shift_perm(self, shift) -> np.ndarray:
        """Permutation p with p[i] = index_of(element_of(i) + shift)."""
        shift = np.asarray(_as_coords(self, shift), dtype=np.int64)
        return self._encode(self.coords_matrix + shift)


@dataclass(frozen=True, order=True)
class ReflectionClass:
    """Orbit of a group element under negation, keyed by its canonical member."""

    representative: Coords

    def __repr__(self) -> str:
        if len(self.representative) == 1:
            return str(self.representative[0])
        return str(self.representative)


@dataclass(frozen=True, eq=False)
class Signal:
    """Scalar-valued function on a finite abelian group, stored flat."""

    group: AbelianGroup
    field: Field
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=self.field.dtype)
        if vals.shape != (self.group.order,):
            raise ValueError(f"values shape {vals.shape} != ({self.group.order},)")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, group: AbelianGroup, field: Field = Field.REAL) -> "Signal":
        return cls(group, field, np.zeros(group.order, dtype=field.dtype))

    @classmethod
    def delta(cls, group: AbelianGroup, at=None, field: Field = Field.REAL) -> "Signal":
        vals = np.zeros(group.order, dtype=field.dtype)
        vals[0 if at is None else group.index_of(at)] = 1
        return cls(group, field, vals)

    @classmethod
    def from_values(cls, group: AbelianGroup, values, field: Field | None = None) -> "Signal":
        vals = np.asarray(values)
        if field is None:
            field = Field.COMPLEX if np.iscomplexobj(vals) else Field.REAL
        if field is Field.REAL and np.iscomplexobj(vals):
            if np.max(np.abs(vals.imag), initial=0.0) != 0.0:
                raise ValueError("complex values cannot build a real signal")
            vals = vals.real
        return cls(group, field, vals)

    def __getitem__(self, a) -> complex | float:
        return self.values[self.group.index_of(a)]

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def support(self, tol: float = 0.0) -> "SupportSet":
        """Elements where |value| exceeds tol (strictly)."""
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        idx = np.nonzero(np.abs(self.values) > tol)[0]
        return SupportSet(self.group, tuple(self.group.element_of(i) for i in idx))

    def to_json_dict(self) -> dict:
        return _envelope_dict(self.group, self.field, self.values)

    @classmethod
    def from_json_dict(cls, d: dict) -> "Signal":
        group, field, values = _envelope_parse(d)
        return cls(group, field, values)


def _envelope_dict(group: AbelianGroup, field: Field, values: np.ndarray) -> dict:
    if field is Field.COMPLEX:
        out = [[float(v.real), float(v.imag)] for v in values]
    else:
        out = [float(v) for v in values]
    return {"moduli": list(group.moduli), "field": field.value, "values": out}


def _envelope_parse(d: dict) -> tuple[AbelianGroup, Field, np.ndarray]:
    group = AbelianGroup(d["moduli"])
    field = Field(d["field"])
    if field is Field.COMPLEX:
        values = np.array([complex(re, im) for re, im in d["values"]], dtype=np.complex128)
    else:
        values = np.array(d["values"], dtype=np.float64)
    return group, field, values


@dataclass(frozen=True)
class SupportSet:
    """A finite subset of group elements, kept sorted and deduplicated."""

    group: AbelianGroup
    elements: tuple[Coords, ...]

    def __init__(self, group: AbelianGroup, elements: Iterable):
        object.__setattr__(self, "group", group)
        elems = sorted({_as_coords(group, a) for a in elements})
        if len(elems) > group.order:
            raise ValueError("support larger than the group")
        object.__setattr__(self, "elements", tuple(elems))

    @property
    def K(self) -> int:
        return len(self.elements)

    def indices(self) -> tuple[int, ...]:
        return tuple(self.group.index_of(a) for a in self.elements)

    def __contains__(self, a) -> bool:
        return _as_coords(self.group, a) in set(self.elements)

    def __iter__(self) -> Iterator[Coords]:
        return iter(self.elements)

    def __repr__(self) -> str:
        if self.group.rank == 1:
            inner = ",".join(str(a[0]) for a in self.elements)
        else:
            inner = ",".join(str(a) for a in self.elements)
        return "{" + inner + "}"

    def to_index_list(self) -> list[int]:
        return list(self.indices())

    @classmethod
    def from_indices(cls, group: AbelianGroup, indices: Sequence[int]) -> "SupportSet":
        return cls(group, (group.element_of(i) for i in indices))
