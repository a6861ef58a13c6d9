"""Exact traveling-wave solutions, stationary relations and speed windows.

Formulas are written for the presentation in which alpha = eps^2 = beta^2 = 1.
Coefficients carrying other values of the small parameters are handled by
absorbing them: B -> alpha*B, kappa -> eps^2*kappa, q^2 -> beta^2*q^2. With
unit-convention coefficients every function reduces to the textbook form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import field2d as f2
from .errors import DecayError, SpeedWindowError
from .field2d import Field2D, Grid2D
from .params import ModelCoefficients

DEFAULT_HALF_WIDTH = 40.0
DECAY_TOL = 1e-10


@dataclass(frozen=True)
class SolitonSpec:
    c: float
    coeffs: ModelCoefficients
    theta: float = 0.0
    q: float = 0.0


def _eff(coeffs):
    """Effective (B, kappa) with the small parameters absorbed."""
    return coeffs.alpha * coeffs.B, coeffs.epsilon**2 * coeffs.kappa


def _require_b(coeffs):
    if coeffs.B == 0 or coeffs.alpha == 0:
        raise SpeedWindowError(
            "no solitary wave when the nonlinear coefficient vanishes "
            "(critical depth ratio)")


# Plane solitary waves of the full system.

def soliton_speed_window(coeffs):
    """Open interval of speeds for which the plane soliton exists and does
    not touch the channel lids."""
    _require_b(coeffs)
    c0, A, B = coeffs.c0, coeffs.A, coeffs.B
    if B > 0:
        c_max = c0 * (1 + B * coeffs.h1_frac / (2 * A))
    else:
        c_max = c0 * (1 - B * coeffs.h2_frac / (2 * A))
    return c0, c_max


def _check_window(c, window, label):
    lo, hi = window
    if not (lo < c < hi):
        raise SpeedWindowError(
            f"{label} speed c={c!r} outside admissible window ({lo!r}, {hi!r})")


def soliton_mass(coeffs):
    """Point-particle mass 2 g' kappa / 3 of the traveling-wave ODE."""
    _, kappa = _eff(coeffs)
    return 2 * coeffs.gprime * kappa / 3


def soliton_width_rate(spec):
    """Decay rate c_Delta = sqrt(2 (c^2 - c0^2) / mass) of the plane soliton.

    This is the rate at which the zero-energy orbit of the Newton form
    leaves gamma = 0; the closed-form profile solves the ODE only with it.
    """
    c0 = spec.coeffs.c0
    if not spec.c > c0:
        raise SpeedWindowError(f"soliton requires c > c0 = {c0!r}, got {spec.c!r}")
    return math.sqrt(2 * (spec.c**2 - c0**2) / soliton_mass(spec.coeffs))


def kbk_soliton_amplitudes(spec):
    """Crest values ``(gamma_m, zeta_m)`` of the plane soliton."""
    coeffs = spec.coeffs
    _require_b(coeffs)
    c, c0 = spec.c, coeffs.c0
    if not c > c0:
        raise SpeedWindowError(f"soliton requires c > c0 = {c0!r}, got {c!r}")
    B, _ = _eff(coeffs)
    return 2 * (c - c0) / B, 2 * coeffs.A * (c - c0) / (c0 * B)


def kbk_soliton_profile(spec, x, t=0.0, enforce_window=True):
    """Evaluate the plane soliton along the propagation coordinate ``x``.

    Returns ``(zeta, gamma)`` where ``gamma`` is the magnitude of the shear
    vector, directed along ``(cos theta, sin theta)``.
    """
    coeffs = spec.coeffs
    _require_b(coeffs)
    if enforce_window:
        _check_window(spec.c, soliton_speed_window(coeffs), "plane soliton")
    c, c0, A = spec.c, coeffs.c0, coeffs.A
    B, _ = _eff(coeffs)
    rate = soliton_width_rate(spec)
    s = np.clip(np.abs((np.asarray(x, dtype=float) - c * t) * rate), 0.0, 700.0)
    ch = np.cosh(s)
    K = 4 * (c**2 - c0**2) / B
    den = 2 * c + 2 * c0 * ch
    gamma = K / den
    zeta = (A / c0) * K * (2 * c0 + 2 * c * ch) / den**2
    return zeta, gamma


def soliton_box_halfwidth(spec, factor=DEFAULT_HALF_WIDTH):
    return factor / soliton_width_rate(spec)


def _wrap(xi, length):
    return (xi + 0.5 * length) % length - 0.5 * length


def _aligned(theta):
    return abs(math.sin(theta)) < 1e-12, abs(math.cos(theta)) < 1e-12


def kbk_soliton_state(spec, grid, t=0.0, x0=0.0, y0=0.0, enforce_window=True):
    """Sample the plane soliton on ``grid`` as a raw KBK state.

    For theta a multiple of pi/2 the profile is wrapped periodically along
    the propagation axis; other angles are sampled without wrapping.
    """
    from .kbk import KBKState

    theta = spec.theta
    along_x, along_y = _aligned(theta)
    X, Y = grid.mesh()
    xi = (X - x0) * math.cos(theta) + (Y - y0) * math.sin(theta) - spec.c * t
    if along_x:
        xi = _wrap(xi, grid.lx)
    elif along_y:
        xi = _wrap(xi, grid.ly)
    zeta, gamma = kbk_soliton_profile(spec, xi, 0.0, enforce_window)
    g1 = gamma * math.cos(theta)
    g2 = gamma * math.sin(theta)
    if along_x:
        g2 = np.zeros_like(g2)
    if along_y:
        g1 = np.zeros_like(g1)
    edge = f2.edge_magnitude(np.hypot(zeta, gamma), x_edge=not along_y,
                             y_edge=not along_x)
    if edge > DECAY_TOL:
        raise DecayError("soliton does not decay at the box edge; enlarge the box",
                         edge)
    return KBKState(Field2D(grid, zeta), Field2D(grid, g1), Field2D(grid, g2),
                    time=t, representation="raw")


def soliton_grid(spec, nx=512, ny=8, ly=None, factor=DEFAULT_HALF_WIDTH):
    """Grid of half-width ``factor / c_Delta`` along x for a theta = 0 soliton.

    By default the transverse spacing is twice the streamwise one, which
    keeps every transverse wavenumber below the streamwise Nyquist value.
    """
    lx = 2 * soliton_box_halfwidth(spec, factor)
    if ly is None:
        ly = 2 * lx / nx * ny
    return Grid2D(nx, ny, lx, ly)


def newton_residual(spec, n=512, half_width=None):
    """Max-norm residual of the traveling-wave ODE on the sampled profile.

    ODE: (2 g' kappa / 3) gamma_xx = B^2 gamma^3 - 3 c B gamma^2
    + 2 (c^2 - A g') gamma, with gamma_xx computed spectrally.
    """
    if half_width is None:
        half_width = soliton_box_halfwidth(spec)
    grid = Grid2D(n, 8, 2 * half_width, 1.0)
    _, gamma = kbk_soliton_profile(spec, grid.x, enforce_window=False)
    g = Field2D(grid, np.broadcast_to(gamma, grid.shape))
    return newton_ode_residual(g, spec).max_abs()


def newton_ode_residual(gamma, spec):
    """Pointwise residual of the traveling-wave ODE for a sampled ``gamma``."""
    coeffs = spec.coeffs
    B, _ = _eff(coeffs)
    c = spec.c
    gxx = f2.ddx(f2.ddx(gamma))
    rhs = (B**2 * gamma**3 - 3 * c * B * gamma**2
           + 2 * (c**2 - coeffs.A * coeffs.gprime) * gamma)
    return soliton_mass(coeffs) * gxx - rhs


def traveling_wave_potential(gamma, spec):
    """Effective potential U(gamma) of the Newton form of the ODE."""
    coeffs = spec.coeffs
    B, _ = _eff(coeffs)
    c = spec.c
    gamma = np.asarray(gamma, dtype=float)
    return gamma**2 * ((coeffs.A * coeffs.gprime - c**2) + B * c * gamma
                       - 0.25 * B**2 * gamma**2)


# Stationary states.

def stationary_zeta(gamma1, gamma2, coeffs):
    """Interface displacement of a stationary state: -B |gamma|^2 / (2 g')."""
    return -(coeffs.alpha * coeffs.B / (2 * coeffs.gprime)) * (gamma1**2 + gamma2**2)


def stationary_residual(gamma1, gamma2, coeffs):
    """Max-norm of div(A gamma - (B^2/2g')|gamma|^2 gamma + (kappa/3) Lap gamma)."""
    B, kappa = _eff(coeffs)
    mod2 = gamma1**2 + gamma2**2
    cubic = B**2 / (2 * coeffs.gprime)
    f1 = coeffs.A * gamma1 - cubic * mod2 * gamma1 + (kappa / 3) * f2.laplacian(gamma1)
    g2 = coeffs.A * gamma2 - cubic * mod2 * gamma2 + (kappa / 3) * f2.laplacian(gamma2)
    return f2.div2(f1, g2).max_abs()


# KP line solitons.

def _kp_threshold(coeffs, q):
    return coeffs.c0 * (1 + 0.5 * coeffs.beta**2 * q**2)


def kp_speed_window(coeffs, q=0.0):
    _require_b(coeffs)
    base = _kp_threshold(coeffs, q)
    A, B = coeffs.A, coeffs.B
    # base * (1 +- h_i B / (2 A (1 + q^2/2))) with base = c0 (1 + q^2/2)
    if B > 0:
        c_max = base + coeffs.c0 * coeffs.h1_frac * B / (2 * A)
    else:
        c_max = base - coeffs.c0 * coeffs.h2_frac * B / (2 * A)
    return base, c_max


def kp_amplitude(spec):
    """Nonzero root zeta_m of the cubic potential of the KP traveling wave."""
    coeffs = spec.coeffs
    _require_b(coeffs)
    threshold = _kp_threshold(coeffs, spec.q)
    if not spec.c > threshold:
        raise SpeedWindowError(
            f"KP soliton requires c > {threshold!r}, got {spec.c!r}")
    B, _ = _eff(coeffs)
    return 2 * coeffs.c0 * (spec.c - threshold) / (coeffs.gprime * B)


def kp_wavenumber(spec):
    """sqrt(3 B zeta_m / (4 kappa)); real for either sign of B."""
    B, kappa = _eff(spec.coeffs)
    return math.sqrt(3 * B * kp_amplitude(spec) / (4 * kappa))


def kp_line_soliton(spec, grid, t=0.0, x0=0.0, enforce_window=True):
    """Sample zeta_m sech^2(k (x - c t + q y)) on a KP grid.

    The phase is wrapped modulo lx, which is periodic in y only when
    ``q * ly`` is a multiple of ``lx`` (always true for q = 0).
    """
    if enforce_window:
        _check_window(spec.c, kp_speed_window(spec.coeffs, spec.q), "KP soliton")
    zm = kp_amplitude(spec)
    k = kp_wavenumber(spec)
    X, Y = grid.mesh()
    xi = _wrap(X - x0 - spec.c * t + spec.q * Y, grid.lx)
    zeta = zm / np.cosh(np.clip(k * xi, -700, 700)) ** 2
    edge = f2.edge_magnitude(zeta, x_edge=True, y_edge=False)
    if edge > DECAY_TOL:
        raise DecayError("KP soliton does not decay at the box edge", edge)
    return Field2D(grid, zeta)


def kp_newton_residual(zeta, spec):
    """Pointwise zeta_x^2 - (3B/kappa) zeta^2 (zeta_m - zeta)."""
    B, kappa = _eff(spec.coeffs)
    zm = kp_amplitude(spec)
    zx = f2.ddx(zeta)
    return zx**2 - (3 * B / kappa) * zeta**2 * (zm - zeta)
