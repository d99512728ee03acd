"""Measurement operators: DFT, Fourier magnitude, periodic and aperiodic autocorrelation.

The forward transform is unnormalized,

    xhat[k] = sum_l x[l] * exp(-2*pi*i * sum_j k_j*l_j/N_j),

computed as a product transform (numpy fftn on the reshaped array); the inverse
carries the 1/|A| factor.  The periodic autocorrelation follows

    a_x[l] = sum_i x[i] * conj(x[i + l]),

with group addition in the index.  Under these conventions the exact spectral
identity is |A| * idft(a_x) = |xhat|^2 (equivalently dft(a_x)[k] = |xhat[-k]|^2;
for real signals both reduce to dft(a_x) = |xhat|^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .groups import AbelianGroup, Field, Signal, _envelope_dict


@dataclass(frozen=True, eq=False)
class Autocorrelation:
    """Periodic autocorrelation values, one per group element (all lags)."""

    group: AbelianGroup
    values: np.ndarray

    def __getitem__(self, a):
        return self.values[self.group.index_of(a)]

    def restricted(self) -> dict:
        """Values keyed by reflection class (representative lag)."""
        return {
            c: self.values[self.group.index_of(c.representative)]
            for c in self.group.reflection_classes
        }

    def to_json_dict(self) -> dict:
        field = Field.COMPLEX if np.iscomplexobj(self.values) else Field.REAL
        return _envelope_dict(self.group, field, self.values)


@dataclass(frozen=True, eq=False)
class FourierMagnitude:
    """Entry-wise modulus of the spectrum; always nonnegative reals."""

    group: AbelianGroup
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.group.order,):
            raise ValueError(f"values shape {vals.shape} != ({self.group.order},)")
        if np.any(vals < 0):
            raise ValueError("Fourier magnitudes must be nonnegative")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def to_json_dict(self) -> dict:
        return _envelope_dict(self.group, Field.REAL, self.values)


def _fftn_flat(group: AbelianGroup, flat: np.ndarray) -> np.ndarray:
    return np.fft.fftn(flat.reshape(group.moduli)).reshape(group.order)


def _ifftn_flat(group: AbelianGroup, flat: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(flat.reshape(group.moduli)).reshape(group.order)


def dft(x: Signal) -> Signal:
    """Unnormalized forward transform; always a complex signal."""
    return Signal(x.group, Field.COMPLEX, _fftn_flat(x.group, x.values.astype(np.complex128)))


def idft(xhat: Signal) -> Signal:
    """Inverse transform with the 1/|A| factor; idft(dft(x)) == x."""
    return Signal(xhat.group, Field.COMPLEX, _ifftn_flat(xhat.group, xhat.values.astype(np.complex128)))


def fourier_magnitude(x: Signal) -> FourierMagnitude:
    return FourierMagnitude(x.group, np.abs(_fftn_flat(x.group, x.values.astype(np.complex128))))


def periodic_autocorrelation(x: Signal, method: str = "spectral") -> Autocorrelation:
    """Periodic autocorrelation a_x[l] = sum_i x[i] conj(x[i+l]).

    Parameters
    ----------
    x : Signal
    method : {"spectral", "direct"}
        "direct" is the O(|A|^2) reference sum; "spectral" evaluates
        a_x = dft(|xhat|^2) / |A|, which matches the reference to ~1e-10.

    Real input yields real values (the tiny spectral imaginary residue is
    dropped); complex input yields complex values with the
    conjugation-reflection symmetry a_x[l] = conj(a_x[-l]).
    """
    g = x.group
    if method == "direct":
        vals = np.empty(g.order, dtype=np.complex128)
        xv = x.values.astype(np.complex128)
        xconj = np.conj(xv)
        for lag_idx in range(g.order):
            perm = g.shift_perm(g.element_of(lag_idx))
            vals[lag_idx] = np.dot(xv, xconj[perm])
    elif method == "spectral":
        power = np.abs(_fftn_flat(g, x.values.astype(np.complex128))) ** 2
        vals = _fftn_flat(g, power.astype(np.complex128)) / g.order
    else:
        raise ValueError(f"unknown method {method!r}")
    if x.field is Field.REAL:
        vals = vals.real
    return Autocorrelation(g, vals)


def wiener_residual(x: Signal) -> float:
    """Max absolute deviation of the autocorrelation/power-spectrum identity.

    Returns max_k | |A| * idft(a_x)[k] - |xhat[k]|^2 |, which is zero in exact
    arithmetic for real and complex signals alike.
    """
    g = x.group
    a = periodic_autocorrelation(x).values.astype(np.complex128)
    lhs = g.order * _ifftn_flat(g, a)
    rhs = np.abs(_fftn_flat(g, x.values.astype(np.complex128))) ** 2
    return float(np.max(np.abs(lhs - rhs)))


def aperiodic_autocorrelation(x: Signal) -> np.ndarray:
    """Non-wrapped autocorrelation b_x[l] = sum_{i=0}^{N-l-1} x[i] conj(x[i+l]).

    Only defined on single-factor groups.
    """
    if x.group.rank != 1:
        raise ValueError("aperiodic autocorrelation requires a single cyclic factor")
    n = x.group.order
    v = x.values
    out = np.array([np.dot(v[: n - lag], np.conj(v[lag:])) for lag in range(n)])
    if x.field is Field.REAL:
        out = out.real
    return out
