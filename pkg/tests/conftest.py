import numpy as np
import pytest

from crystalpr.groups import AbelianGroup, Field, Signal


@pytest.fixture
def z8():
    return AbelianGroup(8)


@pytest.fixture
def z9():
    return AbelianGroup(9)


def random_signal(group, field=Field.REAL, seed=0, unit=False):
    rng = np.random.default_rng(seed)
    if field is Field.REAL:
        vals = rng.standard_normal(group.order)
    else:
        vals = rng.standard_normal(group.order) + 1j * rng.standard_normal(group.order)
    if unit:
        vals = vals / np.linalg.norm(vals)
    return Signal(group, field, vals)


def sparse_signal(group, indices, seed=0, field=Field.REAL, values=None):
    rng = np.random.default_rng(seed)
    vals = np.zeros(group.order, dtype=field.dtype)
    if values is None:
        if field is Field.REAL:
            values = rng.standard_normal(len(indices))
        else:
            values = rng.standard_normal(len(indices)) + 1j * rng.standard_normal(len(indices))
    vals[list(indices)] = values
    return Signal(group, field, vals)


def brute_autocorrelation(x: Signal) -> np.ndarray:
    """Independent O(|A|^2) oracle via plain python loops over coords."""
    g = x.group
    out = np.zeros(g.order, dtype=np.complex128)
    for li in range(g.order):
        lag = g.element_of(li)
        acc = 0.0 + 0.0j
        for ii in range(g.order):
            i = g.element_of(ii)
            acc += complex(x.values[ii]) * np.conj(complex(x.values[g.index_of(g.add(i, lag))]))
        out[li] = acc
    return out
