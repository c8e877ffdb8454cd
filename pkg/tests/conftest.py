"""Shared fixtures: grids, parameter sets, and seeded random fields."""

import numpy as np
import pytest

from sqgev.norms import GevreyParams
from sqgev.spectral import GridSpec, SpectralField, hermitianize


@pytest.fixture
def grid32():
    return GridSpec(32)


@pytest.fixture
def grid16():
    return GridSpec(16)


@pytest.fixture
def params():
    return GevreyParams(a=0.1, s=2.5, alpha=0.25)


@pytest.fixture
def xy32(grid32):
    x = 2 * np.pi * np.arange(grid32.n) / grid32.n
    return np.meshgrid(x, x, indexing="ij")


def make_random_field(grid, seed=0, band=None, amplitude=None):
    """Random Hermitian mean-zero field supported in |k|_inf <= band
    (defaults to the dealiased region)."""
    rng = np.random.default_rng(seed)
    band = band if band is not None else grid.dealias_cutoff
    sup = np.maximum(np.abs(grid.k1), np.abs(grid.k2))
    mask = grid.dealias_mask & (sup <= band)
    c = np.zeros((grid.n, grid.n), dtype=np.complex128)
    c[mask] = rng.standard_normal(int(mask.sum())) \
        + 1j * rng.standard_normal(int(mask.sum()))
    c = hermitianize(c)
    c[~grid.active_mask] = 0.0
    field = SpectralField(grid, c)
    if amplitude is not None and field.l2_norm() > 0:
        field = field * (amplitude / field.l2_norm())
    return field


@pytest.fixture
def random_field(grid32):
    return make_random_field(grid32, seed=11)
