"""Doubly periodic grids, real scalar fields and spectral operators.

Field values are stored as ``(ny, nx)`` arrays in C order, so x varies
fastest. Grid coordinates are centred on the box: ``x_i = -lx/2 + i*dx``.

The periodic box stands in for the unbounded plane. Localized data must
decay below 1e-10 at the box edge for the integral diagnostics (notably the
angular momentum) to be meaningful.

Odd-order multipliers (``d/dx``, ``d/dy``, their inverses) vanish on the
Nyquist row/column so that real fields stay real.
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft

SNAPSHOT_MAGIC = b"SW2D"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIIdd")


def _workers():
    value = os.environ.get("TWOLAYER_THREADS")
    return int(value) if value else 1


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 8 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 8, got {n}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError(f"box lengths must be positive, got {self.lx}, {self.ly}")

    @property
    def dx(self):
        return self.lx / self.nx

    @property
    def dy(self):
        return self.ly / self.ny

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def spectral_shape(self):
        return (self.ny, self.nx // 2 + 1)

    @cached_property
    def x(self):
        return -0.5 * self.lx + self.dx * np.arange(self.nx)

    @cached_property
    def y(self):
        return -0.5 * self.ly + self.dy * np.arange(self.ny)

    def mesh(self):
        """Coordinate arrays ``(X, Y)`` of shape ``(ny, nx)``."""
        return np.meshgrid(self.x, self.y)

    # Wavenumbers and multipliers, laid out for rfft2 over (y, x).

    @cached_property
    def mx(self):
        """Integer x mode numbers, shape (1, nx//2+1)."""
        return np.arange(self.nx // 2 + 1)[None, :]

    @cached_property
    def my(self):
        """Integer y mode numbers, shape (ny, 1)."""
        return np.fft.fftfreq(self.ny, 1.0 / self.ny).astype(int)[:, None]

    @cached_property
    def kx(self):
        return (2 * np.pi / self.lx) * self.mx

    @cached_property
    def ky(self):
        return (2 * np.pi / self.ly) * self.my

    @cached_property
    def k2(self):
        return self.kx**2 + self.ky**2

    @cached_property
    def ikx(self):
        m = 1j * self.kx * np.ones((self.ny, 1))
        m[:, self.nx // 2] = 0.0
        return m

    @cached_property
    def iky(self):
        m = 1j * self.ky * np.ones((1, self.nx // 2 + 1))
        m[self.ny // 2, :] = 0.0
        return m

    @cached_property
    def inv_ikx(self):
        """Pseudoinverse of ikx: zero on kx = 0 and on the Nyquist column."""
        m = np.zeros(self.spectral_shape, dtype=complex)
        nz = self.ikx != 0
        m[nz] = 1.0 / self.ikx[nz]
        return m

    @cached_property
    def inv_kx2(self):
        """Pseudoinverse of -kx^2 (the symbol of d^2/dx^2)."""
        m = np.zeros(self.spectral_shape)
        kx2 = np.broadcast_to(self.kx**2, self.spectral_shape)
        nz = kx2 != 0
        m[nz] = -1.0 / kx2[nz]
        return m

    @cached_property
    def dealias_mask(self):
        keep = (np.abs(self.mx) <= self.nx / 3) & (np.abs(self.my) <= self.ny / 3)
        return keep.astype(float)

    @cached_property
    def kx_zero(self):
        """Mask of the kx = 0 column."""
        m = np.zeros(self.spectral_shape, dtype=bool)
        m[:, 0] = True
        return m

    @cached_property
    def _mode_weight(self):
        # rfft stores kx > 0 once; those modes count twice in Parseval.
        w = np.full(self.spectral_shape, 2.0)
        w[:, 0] = 1.0
        w[:, self.nx // 2] = 1.0
        return w

    def fft(self, values):
        return scipy.fft.rfft2(values, workers=_workers())

    def ifft(self, coeffs):
        return scipy.fft.irfft2(coeffs, s=self.shape, workers=_workers())

    def apply(self, values, multiplier):
        return self.ifft(multiplier * self.fft(values))

    def quad(self, values):
        """Periodic trapezoid rule: sum(values) dx dy."""
        return float(np.sum(values)) * self.dx * self.dy

    def spectral_energy(self, coeffs, mask=None):
        """Integral of f^2 from the rfft coefficients of f (Parseval)."""
        w = self._mode_weight if mask is None else self._mode_weight * mask
        n = self.nx * self.ny
        return float(np.sum(w * np.abs(coeffs) ** 2)) * self.lx * self.ly / n**2


@dataclass(frozen=True, eq=False)
class Field2D:
    """A real scalar field on a :class:`Grid2D`."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {values.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid, func):
        X, Y = grid.mesh()
        return cls(grid, np.broadcast_to(func(X, Y), grid.shape).copy())

    def _wrap(self, values):
        return Field2D(self.grid, values)

    def _other(self, other):
        if isinstance(other, Field2D):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return self._wrap(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.values - self._other(other))

    def __rsub__(self, other):
        return self._wrap(self._other(other) - self.values)

    def __mul__(self, other):
        return self._wrap(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.values / self._other(other))

    def __neg__(self):
        return self._wrap(-self.values)

    def __pow__(self, n):
        return self._wrap(self.values**n)

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))

    def copy(self):
        return self._wrap(self.values.copy())


def _spectral(f, multiplier):
    return Field2D(f.grid, f.grid.apply(f.values, multiplier))


def ddx(f):
    return _spectral(f, f.grid.ikx)


def ddy(f):
    return _spectral(f, f.grid.iky)


def laplacian(f):
    return _spectral(f, -f.grid.k2)


def inv_dx(f):
    """Pseudoinverse of d/dx; every kx = 0 mode is set to zero."""
    return _spectral(f, f.grid.inv_ikx)


def inv_dx2(f):
    """Pseudoinverse of d^2/dx^2; every kx = 0 mode is set to zero."""
    return _spectral(f, f.grid.inv_kx2)


def helmholtz_solve(f, c):
    """Solve (1 - c Laplacian) u = f for c >= 0."""
    if c < 0:
        raise ValueError(f"Helmholtz coefficient must be nonnegative, got {c}")
    return _spectral(f, 1.0 / (1.0 + c * f.grid.k2))


def curl2(g1, g2):
    return ddx(g2) - ddy(g1)


def div2(g1, g2):
    return ddx(g1) + ddy(g2)


def dealias(f):
    """Zero all modes with |mx| > nx/3 or |my| > ny/3."""
    return _spectral(f, f.grid.dealias_mask)


def dealiased_product(f, g):
    return dealias(f * g)


def integral(f):
    return f.grid.quad(f.values)


def weighted_integral(f, w="1"):
    """Integral of ``w * f`` for ``w`` in ``{"1", "x", "y"}``.

    Coordinates are measured from the box centre.
    """
    grid = f.grid
    if w in ("1", 1):
        return integral(f)
    if w == "x":
        return grid.quad(f.values * grid.x[None, :])
    if w == "y":
        return grid.quad(f.values * grid.y[:, None])
    raise ValueError(f"weight must be one of '1', 'x', 'y'; got {w!r}")


def spectral_energy(f):
    """Integral of f^2 evaluated in Fourier space."""
    return f.grid.spectral_energy(f.grid.fft(f.values))


def inner(f, g):
    """L2 pairing used for skew-symmetry checks."""
    return integral(f * g)


def edge_magnitude(values, x_edge=True, y_edge=True):
    """Largest |value| on the box edge (first column and/or first row).

    On a periodic grid the first column sits at x = -lx/2, the seam of the
    box, so it is where decaying data must be negligible.
    """
    parts = [0.0]
    if x_edge:
        parts.append(float(np.max(np.abs(values[:, 0]))))
    if y_edge:
        parts.append(float(np.max(np.abs(values[0, :]))))
    return max(parts)


def write_snapshot(path, f):
    """Write ``f`` in the SW2D binary format (little-endian, x fastest)."""
    grid = f.grid
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, grid.nx, grid.ny,
                          float(grid.lx), float(grid.ly))
    data = np.ascontiguousarray(f.values, dtype="<f8").tobytes()
    Path(path).write_bytes(header + data)


def read_snapshot(path):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated snapshot header")
    magic, version, nx, ny, lx, ly = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    expected = _HEADER.size + 8 * nx * ny
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    grid = Grid2D(nx, ny, lx, ly)
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(ny, nx)
    return Field2D(grid, values.astype(float))
