"""Sparse phase retrieval over finite abelian groups.

Forward measurement maps (Fourier magnitude, periodic autocorrelation),
the intrinsic symmetry group and its orbits, difference-set combinatorics,
projection-based feasibility solvers, and numerical uniqueness verification,
with a reproducible seeded experiment CLI.
"""

from .groups import AbelianGroup, Field, ReflectionClass, Signal, SupportSet

__version__ = "0.1.0"

__all__ = [
    "AbelianGroup",
    "Field",
    "ReflectionClass",
    "Signal",
    "SupportSet",
    "__version__",
]
