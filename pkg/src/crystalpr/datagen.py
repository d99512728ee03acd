"""Synthetic problem instances: planted sparse signals and Poisson-noised intensities."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .diffsets import sample_support
from .fourier import FourierMagnitude, fourier_magnitude
from .groups import AbelianGroup, Field, Signal, SupportSet
from .rng import substream


class ValueDist(enum.Enum):
    UNIFORM01 = "uniform01"
    STD_NORMAL = "std_normal"


@dataclass(frozen=True)
class PlantedInstance:
    """A ground-truth sparse signal together with its measured Fourier magnitude."""

    x_true: Signal
    y0: FourierMagnitude
    support: SupportSet
    seed: int
    noise: dict | None = None

    def to_json_dict(self) -> dict:
        return {
            "signal": self.x_true.to_json_dict(),
            "magnitude": self.y0.to_json_dict(),
            "support": self.support.to_index_list(),
            "seed": self.seed,
            "noise": self.noise,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d: dict) -> "PlantedInstance":
        x = Signal.from_json_dict(d["signal"])
        y0 = FourierMagnitude(x.group, np.array(d["magnitude"]["values"], dtype=np.float64))
        support = SupportSet.from_indices(x.group, d["support"])
        return cls(x, y0, support, int(d["seed"]), d.get("noise"))

    @classmethod
    def from_json(cls, text: str) -> "PlantedInstance":
        return cls.from_json_dict(json.loads(text))


def plant_generic(
    group: AbelianGroup,
    k: int,
    seed: int,
    value_dist: ValueDist = ValueDist.UNIFORM01,
) -> PlantedInstance:
    """Uniform random K-support with i.i.d. nonzero values; exact magnitudes."""
    rng = substream(seed, 0)
    support = sample_support(group, k, rng)
    vals = np.zeros(group.order)
    idx = list(support.indices())
    if value_dist is ValueDist.UNIFORM01:
        vals[idx] = rng.uniform(0.0, 1.0, size=k)
    else:
        vals[idx] = rng.standard_normal(k)
    x = Signal(group, Field.REAL, vals)
    return PlantedInstance(x, fourier_magnitude(x), support, seed)


def plant_binary(group: AbelianGroup, k: int, seed: int) -> PlantedInstance:
    """Indicator signal of a uniform random K-subset."""
    rng = substream(seed, 0)
    support = sample_support(group, k, rng)
    vals = np.zeros(group.order)
    vals[list(support.indices())] = 1.0
    x = Signal(group, Field.REAL, vals)
    return PlantedInstance(x, fourier_magnitude(x), support, seed)


def poissonize(y0: FourierMagnitude, photon_scale: float, rng: np.random.Generator) -> FourierMagnitude:
    """Poisson-sample the intensities |y0|^2 at the given photon scale.

    Each intensity I is replaced by Poisson(photon_scale * I) / photon_scale,
    so the expected sampled intensity equals I; magnitudes are the square
    roots.  Zero-intensity bins stay exactly zero.
    """
    if photon_scale <= 0:
        raise ValueError("photon_scale must be positive")
    intensity = y0.values.astype(np.float64) ** 2
    counts = rng.poisson(photon_scale * intensity)
    return FourierMagnitude(y0.group, np.sqrt(counts / photon_scale))
