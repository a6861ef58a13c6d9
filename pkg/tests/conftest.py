import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twolayer import kbk
from twolayer.field2d import Field2D, Grid2D, ddx, ddy
from twolayer.params import PhysicalParams, derive_coefficients

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("default")


def band_limited(grid, rng, frac=6, zero_kx0=False):
    """Random real field with modes |mx| <= nx/frac and |my| <= ny/frac,
    normalized to unit max-norm."""
    zh = np.zeros(grid.spectral_shape, complex)
    keep = (np.abs(grid.mx) <= grid.nx // frac) & (np.abs(grid.my) <= grid.ny // frac)
    keep = np.broadcast_to(keep, grid.spectral_shape)
    zh[keep] = rng.normal(size=keep.sum()) + 1j * rng.normal(size=keep.sum())
    zh[:, -1] = 0.0
    zh[grid.ny // 2, :] = 0.0
    if zero_kx0:
        zh[1:, 0] = 0.0
    v = grid.ifft(zh)
    return Field2D(grid, v / np.max(np.abs(v)))


def random_state(grid, rng, scale=1.0, representation="raw"):
    """Band-limited KBK state whose shear is a gradient (curl free)."""
    phi = band_limited(grid, rng)
    zeta = band_limited(grid, rng) * scale
    return kbk.KBKState(zeta, ddx(phi) * scale, ddy(phi) * scale, 0.0, representation)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def default_coeffs():
    """rho1=1, rho2=2, h1=h2=1 with alpha=0.01 and eps=0.1."""
    return derive_coefficients(PhysicalParams())


@pytest.fixture
def unit_coeffs():
    return derive_coefficients(PhysicalParams(), convention="unit")


@pytest.fixture
def small_grid():
    return Grid2D(32, 32, 2 * np.pi, 2 * np.pi)
