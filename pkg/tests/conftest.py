"""Shared lattices and fields for the test suite"""

import numpy as np
import pytest

from field_decomposition import MomentumLatticeField

# q in [-2, 1.5] per axis, so q^2 spans all four domains
SMALL_DIMS = (8, 8, 8, 8)
SMALL_SPACING = (0.5, 0.5, 0.5, 0.5)
ACCEPTANCE_DIMS = (16, 16, 16, 16)
ACCEPTANCE_SPACING = (0.25, 0.25, 0.25, 0.25)


def random_field(rng, dims=SMALL_DIMS, spacing=SMALL_SPACING, M=1.0, components=1):
    shape = tuple(dims) + (components,)
    values = rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape)
    return MomentumLatticeField(dims, spacing, M, values)


def site_index(dims, k):
    """Array index of the centered lattice momentum k"""
    return tuple(int(ki) + n // 2 for ki, n in zip(k, dims))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def field(rng):
    return random_field(rng)


@pytest.fixture
def spinor_field(rng):
    return random_field(rng, components=4)


@pytest.fixture
def acceptance_field(rng):
    return random_field(rng, ACCEPTANCE_DIMS, ACCEPTANCE_SPACING)
