"""Unidirectional KP-II model for the interface displacement.

The evolution solved here is

    zeta_t = -c0 zeta_x - (3/4) alpha sqrt(g'/A) B (zeta^2)_x
             - (eps^2/6) kappa sqrt(g'/A) zeta_xxx - (beta^2/2) c0 dx^-1 zeta_yy

on a periodic box whose y coordinate is the stretched transverse variable
y' = beta y. The nonlocal term uses the kx = 0 pseudoinverse of d/dx, so
the kx = 0, ky != 0 content of zeta must vanish; it is monitored.

Besides the evolution, the module carries the reduced Poisson operator of
the KP flow, its restricted Hamiltonian and the map that lifts a KP state
to a (zeta, gamma) state of the parent two-dimensional system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import field2d as f2
from .errors import ConstraintViolation, NumericalAbort
from .field2d import Field2D, Grid2D
from .kbk import RK4_STABILITY, KBKState, SolverConfig, _rk4

KX0_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class KPState:
    zeta: Field2D
    time: float = 0.0

    @property
    def grid(self):
        return self.zeta.grid

    def kx0_norm(self):
        """Max amplitude carried by the kx = 0, ky != 0 modes of zeta."""
        return _kx0_norm(self.grid, self.grid.fft(self.zeta.values))


@dataclass
class KPSeries:
    time: float
    mass: float
    momentum: float
    H: float
    kx0_norm: float

    def row(self):
        return [self.time, self.mass, self.momentum, self.H, self.kx0_norm]


KP_COLUMNS = ["t", "mass", "momentum", "H", "kx0_norm"]


@dataclass
class KPTrajectory:
    final: KPState
    series: List[KPSeries] = field(default_factory=list)
    snapshots: List[KPState] = field(default_factory=list)
    steps: int = 0
    dt: float = 0.0


def _kx0_norm(grid, zh):
    col = zh[:, 0].copy()
    col[0] = 0.0
    n = grid.nx * grid.ny
    return float(np.max(np.abs(col))) / n * 2.0


def _nonlinear_coef(coeffs):
    return 0.75 * coeffs.alpha * math.sqrt(coeffs.gprime / coeffs.A) * coeffs.B


def _dispersive_coef(coeffs):
    return coeffs.epsilon**2 / 6 * coeffs.kappa * math.sqrt(coeffs.gprime / coeffs.A)


def _linear_symbol(grid, coeffs):
    """Multiplier L with zeta_t = L zeta for the linear part."""
    c0 = coeffs.c0
    transverse = 0.5 * coeffs.beta**2 * c0 * (-grid.ky**2) * grid.inv_ikx
    return -c0 * grid.ikx + _dispersive_coef(coeffs) * grid.ikx * grid.kx**2 \
        - transverse


def _rhs_kp_hat(grid, coeffs, zh, dealias=True):
    zeta = grid.ifft(zh)
    sq = grid.fft(zeta * zeta)
    if dealias:
        sq = sq * grid.dealias_mask
    return _linear_symbol(grid, coeffs) * zh - _nonlinear_coef(coeffs) * grid.ikx * sq


def rhs_kp(state, coeffs, dealias=True):
    """Time derivative of zeta under the KP flow."""
    grid = state.grid
    zh = grid.fft(state.zeta.values)
    return Field2D(grid, grid.ifft(_rhs_kp_hat(grid, coeffs, zh, dealias)))


def kp_hamiltonian(state, coeffs, dealias=True):
    """Restricted Hamiltonian int(g' zeta^2 + (alpha/4) B (g'^2/c0^2) zeta^3).

    With ``dealias`` the cubic term is evaluated as int zeta * P(zeta^2).
    """
    grid = state.grid
    z = state.zeta.values
    sq = z * z
    if dealias:
        sq = grid.apply(sq, grid.dealias_mask)
    cubic = 0.25 * coeffs.alpha * coeffs.B * coeffs.gprime**2 / coeffs.c0**2
    return grid.quad(coeffs.gprime * z * z + cubic * z * sq)


def kp_variational_derivative(state, coeffs, dealias=True):
    """2 g' zeta + (3/4) alpha (g'^2/c0^2) B zeta^2."""
    z = state.zeta
    sq = z * z
    if dealias:
        sq = f2.dealias(sq)
    return 2 * coeffs.gprime * z \
        + 0.75 * coeffs.alpha * coeffs.gprime**2 / coeffs.c0**2 * coeffs.B * sq


def _product(a, b, dealias):
    p = a * b
    return f2.dealias(p) if dealias else p


def dirac_apply(state, f, coeffs, dealias=False):
    """Apply the reduced Poisson operator of the KP flow to ``f``.

    (c0/4g') (-2 d_x - (alpha/2)(B/A)(zeta d_x + d_x zeta)
              - (eps^2/3)(kappa/A) d_xxx - beta^2 d_y dx^-1 d_y)

    The symmetric term is evaluated literally as zeta f_x + (zeta f)_x.
    """
    zeta = state.zeta
    A = coeffs.A
    fx = f2.ddx(f)
    sym = _product(zeta, fx, dealias) + f2.ddx(_product(zeta, f, dealias))
    inner = (-2 * fx
             - 0.5 * coeffs.alpha * coeffs.B / A * sym
             - coeffs.epsilon**2 / 3 * coeffs.kappa / A * f2.ddx(f2.ddx(fx))
             - coeffs.beta**2 * f2.ddy(f2.inv_dx(f2.ddy(f))))
    return coeffs.c0 / (4 * coeffs.gprime) * inner


def dirac_flow(state, coeffs, dealias=True):
    """Hamiltonian vector field of the restricted Hamiltonian, first order.

    The leading part -(c0/2g') d_x acts on the full differential; the
    O(alpha, eps^2, beta^2) parts of the operator act on its leading piece
    2 g' zeta only. Every term dropped is of second order in the small
    parameters, and the result coincides with :func:`rhs_kp`.
    """
    dH = kp_variational_derivative(state, coeffs, dealias)
    base = 2 * coeffs.gprime * state.zeta
    lead = coeffs.c0 / (2 * coeffs.gprime)
    corrections = dirac_apply(state, base, coeffs, dealias) + lead * f2.ddx(base)
    return -lead * f2.ddx(dH) + corrections


def dirac_remainder(state, coeffs, dealias=False):
    """Higher-order part of dirac_apply(dH) that the KP flow discards.

    Equals the O(alpha) part of the operator, without its leading
    -(c0/2g') d_x piece, applied to the O(alpha) piece of the differential.
    """
    z = state.zeta
    sq = _product(z, z, dealias)
    cubic_part = 0.75 * coeffs.alpha * coeffs.gprime**2 / coeffs.c0**2 * coeffs.B * sq
    full = dirac_apply(state, cubic_part, coeffs, dealias)
    return full + coeffs.c0 / (2 * coeffs.gprime) * f2.ddx(cubic_part)


# Normalized (pencil) form of the reduced operator.

@dataclass(frozen=True)
class PencilScales:
    """x = sx X, y = sy Y, zeta = sz Z map the physical operator onto the
    normalized one, up to the overall factor ``prefactor``."""

    sx: float
    sy: float
    sz: float
    prefactor: float
    alpha: float


def pencil_scales(coeffs):
    al = coeffs.alpha
    if al <= 0 or coeffs.B == 0:
        raise ValueError("normalized form needs alpha > 0 and B != 0")
    sx = math.sqrt(coeffs.epsilon**2 * coeffs.kappa / (3 * coeffs.A * al))
    sy = sx * coeffs.beta / math.sqrt(al) if coeffs.beta > 0 else math.nan
    sz = 2 * coeffs.A / coeffs.B
    return PencilScales(sx, sy, sz, coeffs.c0 / (4 * coeffs.gprime * sx), al)


def pencil_apply(Z, F, alpha):
    """-2 F_X - alpha (F_XXX + 2 Z F_X + Z_X F + d_Y dX^-1 d_Y F)."""
    fx = f2.ddx(F)
    return -2 * fx - alpha * (f2.ddx(f2.ddx(fx)) + 2 * Z * fx + f2.ddx(Z) * F
                              + f2.ddy(f2.inv_dx(f2.ddy(F))))


# Lift to the two-dimensional model.

def gamma_from_zeta(state, coeffs):
    """Shear components tied to zeta by the unidirectional constraint.

    gamma1 = sqrt(g'/A)(zeta - (alpha/4)(B/A) zeta^2 - (eps^2/6)(kappa/A) zeta_xx
                        - (beta^2/2) dx^-2 zeta_yy)
    and gamma2' = dx^-1 d_y' gamma1, both on the stretched grid.

    The kx = 0, ky != 0 modes of gamma1 (fed by zeta^2 even when zeta has
    none) are removed, so that the pair is exactly curl free.
    """
    z = state.zeta
    grid = z.grid
    A = coeffs.A
    s = math.sqrt(coeffs.gprime / A)
    g1 = s * (z - 0.25 * coeffs.alpha * coeffs.B / A * f2.dealias(z * z)
              - coeffs.epsilon**2 / 6 * coeffs.kappa / A * f2.ddx(f2.ddx(z))
              - 0.5 * coeffs.beta**2 * f2.inv_dx2(f2.ddy(f2.ddy(z))))
    g1h = grid.fft(g1.values)
    g1h[1:, 0] = 0.0
    g1 = Field2D(grid, grid.ifft(g1h))
    g2 = f2.inv_dx(f2.ddy(g1))
    return g1, g2


def kbk_grid_for(kp_grid, coeffs):
    """Unstretched grid matching a KP grid: ly = ly' / beta."""
    if coeffs.beta > 0:
        return Grid2D(kp_grid.nx, kp_grid.ny, kp_grid.lx, kp_grid.ly / coeffs.beta)
    return kp_grid


def embed_to_kbk(state, coeffs, grid=None, curl_tol=1e-8):
    """Lift a KP state to a raw KBK state on the unstretched grid.

    zeta is copied; gamma follows :func:`gamma_from_zeta` with the transverse
    component scaled back by beta. Raises :class:`ConstraintViolation` if
    zeta carries kx = 0 transverse content or if the lifted shear is not
    curl free (y-dependent data with beta = 0).
    """
    kp_grid = state.grid
    if state.kx0_norm() > KX0_TOL:
        raise ConstraintViolation(
            f"kx = 0 transverse content {state.kx0_norm():.3e} exceeds {KX0_TOL:.1e}")
    target = kbk_grid_for(kp_grid, coeffs) if grid is None else grid
    if (target.nx, target.ny, target.lx) != (kp_grid.nx, kp_grid.ny, kp_grid.lx):
        raise ValueError("KBK grid must share nx, ny and lx with the KP grid")
    expected = target.ly * coeffs.beta if coeffs.beta > 0 else kp_grid.ly
    if not math.isclose(expected, kp_grid.ly, rel_tol=1e-12):
        raise ValueError(
            f"KBK box height {target.ly} does not match ly'/beta = "
            f"{kp_grid.ly}/{coeffs.beta}")
    g1, g2p = gamma_from_zeta(state, coeffs)
    zeta = Field2D(target, state.zeta.values.copy())
    gamma1 = Field2D(target, g1.values)
    gamma2 = Field2D(target, coeffs.beta * g2p.values)
    lifted = KBKState(zeta, gamma1, gamma2, state.time, "raw")
    norm = lifted.curl_norm()
    if norm > curl_tol:
        raise ConstraintViolation(
            f"lifted shear has curl {norm:.3e} > {curl_tol:.1e}; y-dependent "
            "data needs beta > 0")
    return lifted


# Time stepping.

def kp_max_frequency(grid, coeffs, state=None):
    c0 = coeffs.c0
    kx = np.abs(np.broadcast_to(grid.kx, grid.spectral_shape))
    ky2 = np.broadcast_to(grid.ky**2, grid.spectral_shape)
    safe = np.where(kx > 0, kx, np.inf)
    omega = c0 * kx + _dispersive_coef(coeffs) * kx**3 \
        + 0.5 * coeffs.beta**2 * c0 * ky2 / safe
    w = float(np.max(omega))
    if state is not None:
        w += 2 * abs(_nonlinear_coef(coeffs)) * state.zeta.max_abs() * float(np.max(kx))
    return w


def kp_stability_bound(grid, coeffs, state=None):
    w = kp_max_frequency(grid, coeffs, state)
    return math.inf if w == 0 else RK4_STABILITY / w


def project_kx0(state):
    """Zero the kx = 0, ky != 0 modes of zeta (the mean is kept)."""
    grid = state.grid
    zh = grid.fft(state.zeta.values)
    mean = zh[0, 0]
    zh[:, 0] = 0.0
    zh[0, 0] = mean
    return KPState(Field2D(grid, grid.ifft(zh)), state.time)


def kp_step(state, coeffs, dt, dealias=True):
    grid = state.grid

    def rhs(zh):
        return (_rhs_kp_hat(grid, coeffs, zh, dealias),)

    (zh,) = _rk4(rhs, (grid.fft(state.zeta.values),), dt)
    return KPState(Field2D(grid, grid.ifft(zh)), state.time + dt)


def _series(state, coeffs, dealias):
    z = state.zeta
    return KPSeries(state.time, f2.integral(z), f2.integral(z * z),
                    kp_hamiltonian(state, coeffs, dealias), state.kx0_norm())


def kp_evolve(state, coeffs, config: SolverConfig,
              callback: Optional[Callable[[KPState, int], None]] = None,
              kx0_tol=KX0_TOL):
    """RK4 integration of the KP flow over ``config.t_end``.

    ``config.representation`` is ignored. The series (mass, int zeta^2,
    Hamiltonian, kx = 0 monitor) is recorded every ``invariant_every`` steps.
    """
    grid = state.grid
    if not state.zeta.is_finite():
        raise NumericalAbort("initial KP state is not finite", step=0)
    if state.kx0_norm() > kx0_tol:
        raise ConstraintViolation(
            f"kx = 0 transverse content {state.kx0_norm():.3e} exceeds {kx0_tol:.1e}")
    bound = kp_stability_bound(grid, coeffs, state)
    dt = config.dt if config.dt is not None else 0.5 * bound
    nsteps = max(1, math.ceil(config.t_end / dt - 1e-9)) if config.t_end > 0 else 0
    if nsteps:
        dt = config.t_end / nsteps

    def rhs(zh):
        return (_rhs_kp_hat(grid, coeffs, zh, config.dealias),)

    traj = KPTrajectory(final=state, dt=dt)

    def record(st, n, force=False):
        if config.invariant_every and (n % config.invariant_every == 0 or force):
            traj.series.append(_series(st, coeffs, config.dealias))
        if config.snapshot_every and (n % config.snapshot_every == 0 or force):
            traj.snapshots.append(st)
        if callback is not None:
            callback(st, n)

    record(state, 0)
    zh = grid.fft(state.zeta.values)
    t0 = state.time
    for n in range(1, nsteps + 1):
        (zh,) = _rk4(rhs, (zh,), dt)
        zh[1:, 0] = 0.0
        if not np.all(np.isfinite(zh)):
            raise NumericalAbort("non-finite values in the KP solution", step=n)
        last = n == nsteps
        if last or callback is not None or \
                (config.invariant_every and n % config.invariant_every == 0) or \
                (config.snapshot_every and n % config.snapshot_every == 0):
            current = KPState(Field2D(grid, grid.ifft(zh)), t0 + n * dt)
            if current.kx0_norm() > kx0_tol:
                raise NumericalAbort("kx = 0 transverse content drifted", step=n)
            record(current, n, force=last)
            traj.final = current
    traj.steps = nsteps
    return traj


def crest(values, x0, lx, iterations=30):
    """Sub-grid ``(position, value)`` of the extremum of a periodic 1D sample.

    Newton iteration on the derivative of the trigonometric interpolant,
    started from the sample of largest magnitude. ``x0`` is the coordinate
    of sample 0.
    """
    f = np.asarray(values, dtype=float)
    n = f.size
    fh = np.fft.rfft(f)
    k = 2 * np.pi / lx * np.arange(fh.size)
    w = np.full(fh.size, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0

    def interp(order, x):
        phase = np.exp(1j * k * x) * (1j * k) ** order
        return float(np.real(np.sum(w * fh * phase))) / n

    x = int(np.argmax(np.abs(f))) * lx / n
    for _ in range(iterations):
        d2 = interp(2, x)
        if d2 == 0:
            break
        step = interp(1, x) / d2
        x -= step
        if abs(step) < 1e-15 * lx:
            break
    return x0 + x, interp(0, x)
