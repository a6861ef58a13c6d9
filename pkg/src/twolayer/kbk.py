"""KBK-Boussinesq dynamics for the interface displacement and the shear vector.

Two representations are supported:

``raw``
    fields (zeta, gamma1, gamma2); Hamiltonian flow with the constant
    Poisson operator. Its linearization is ill-posed for
    |k|^2 > 3A / (eps^2 kappa), so it is only usable on grids whose resolved
    wavenumbers stay below that cutoff.

``regularized``
    fields (zeta, gamma-bar) with gamma-bar = gamma + (eps^2 kappa / 3A) Lap gamma;
    the shear equation carries a Helmholtz operator on its time derivative and
    every Fourier mode is linearly stable.

The sheet variables are sigma = gamma2 and tau = -gamma1.

Time stepping is classical RK4 in Fourier space. Quadratic products are
dealiased with the 2/3 rule.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from . import field2d as f2
from .errors import ConstraintViolation, NumericalAbort
from .field2d import Field2D, Grid2D

RK4_STABILITY = 2.5
REPRESENTATIONS = ("raw", "regularized")


@dataclass(frozen=True, eq=False)
class KBKState:
    zeta: Field2D
    gamma1: Field2D
    gamma2: Field2D
    time: float = 0.0
    representation: str = "raw"

    def __post_init__(self):
        if self.representation not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {self.representation!r}")
        grids = {self.zeta.grid, self.gamma1.grid, self.gamma2.grid}
        if len(grids) != 1:
            raise ValueError("state fields live on different grids")

    @property
    def grid(self):
        return self.zeta.grid

    @property
    def sigma(self):
        return self.gamma2

    @property
    def tau(self):
        return -self.gamma1

    @classmethod
    def zeros(cls, grid, representation="raw"):
        z = Field2D.zeros(grid)
        return cls(z, z.copy(), z.copy(), 0.0, representation)

    @classmethod
    def from_sheet(cls, zeta, sigma, tau, time=0.0):
        """Build a raw state from (zeta, sigma, tau)."""
        return cls(zeta, -tau, sigma, time, "raw")

    def fields(self):
        return self.zeta, self.gamma1, self.gamma2

    def curl_norm(self):
        return f2.curl2(self.gamma1, self.gamma2).max_abs()

    def is_finite(self):
        return all(f.is_finite() for f in self.fields())


@dataclass
class SolverConfig:
    dt: Optional[float] = None
    t_end: float = 1.0
    dealias: bool = True
    representation: str = "regularized"
    snapshot_every: int = 0
    invariant_every: int = 1
    growth_guard: float = 10.0

    def __post_init__(self):
        if self.representation not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")


@dataclass
class InvariantReport:
    time: float
    H: float
    mass: float
    gamma_flux: tuple
    M1: float
    M2: float
    Lrot: float
    curl_norm: float
    lrot_reliable: bool = True

    def row(self):
        return [self.time, self.H, self.mass, self.gamma_flux[0],
                self.gamma_flux[1], self.M1, self.M2, self.Lrot, self.curl_norm]


INVARIANT_COLUMNS = ["t", "H", "mass", "gx", "gy", "M1", "M2", "L", "curl_norm"]


@dataclass
class Trajectory:
    final: KBKState
    invariants: List[InvariantReport] = field(default_factory=list)
    snapshots: List[KBKState] = field(default_factory=list)
    steps: int = 0
    dt: float = 0.0


# Variational structure (raw representation).

def _require(state, representation):
    if state.representation != representation:
        raise ValueError(
            f"expected a {representation} state, got {state.representation}")


def _product(a, b, dealias):
    p = a * b
    return f2.dealias(p) if dealias else p


def variational_derivatives(state, coeffs, dealias=True):
    """Return (dH/dzeta, dH/dsigma, dH/dtau) of the WNL Hamiltonian."""
    _require(state, "raw")
    A, B, al = coeffs.A, coeffs.B, coeffs.alpha
    disp = coeffs.epsilon**2 * coeffs.kappa / 3
    zeta, sigma, tau = state.zeta, state.sigma, state.tau
    d_zeta = coeffs.gprime * zeta + 0.5 * al * B * _product(sigma, sigma, dealias) \
        + 0.5 * al * B * _product(tau, tau, dealias)
    d_sigma = A * sigma + al * B * _product(zeta, sigma, dealias) \
        + disp * f2.laplacian(sigma)
    d_tau = A * tau + al * B * _product(zeta, tau, dealias) + disp * f2.laplacian(tau)
    return d_zeta, d_sigma, d_tau


def apply_poisson(d_zeta, d_sigma, d_tau):
    """Apply the reduced Poisson operator in (zeta, sigma, tau) variables."""
    zeta_dot = -f2.ddy(d_sigma) + f2.ddx(d_tau)
    sigma_dot = -f2.ddy(d_zeta)
    tau_dot = f2.ddx(d_zeta)
    return zeta_dot, sigma_dot, tau_dot


def apply_poisson_gamma(d_zeta, d_gamma1, d_gamma2):
    """Same operator in (zeta, gamma) variables: (-div, -grad)."""
    return -f2.div2(d_gamma1, d_gamma2), -f2.ddx(d_zeta), -f2.ddy(d_zeta)


# Right-hand sides. Internal versions work on rfft coefficients.

def _products_hat(grid, zeta, g1, g2, dealias):
    mask = grid.dealias_mask if dealias else 1.0
    zg1 = grid.fft(zeta * g1) * mask
    zg2 = grid.fft(zeta * g2) * mask
    mod2 = grid.fft(g1 * g1 + g2 * g2) * mask
    return zg1, zg2, mod2


def _rhs_raw_hat(grid, coeffs, zh, g1h, g2h, dealias=True):
    zeta, g1, g2 = grid.ifft(zh), grid.ifft(g1h), grid.ifft(g2h)
    zg1, zg2, mod2 = _products_hat(grid, zeta, g1, g2, dealias)
    A, aB = coeffs.A, coeffs.alpha * coeffs.B
    disp = coeffs.epsilon**2 * coeffs.kappa / 3
    ikx, iky = grid.ikx, grid.iky
    lin = A - disp * grid.k2
    z_t = -lin * (ikx * g1h + iky * g2h) - aB * (ikx * zg1 + iky * zg2)
    phi = coeffs.gprime * zh + 0.5 * aB * mod2
    return z_t, -ikx * phi, -iky * phi


def _rhs_reg_hat(grid, coeffs, zh, g1h, g2h, dealias=True):
    zeta, g1, g2 = grid.ifft(zh), grid.ifft(g1h), grid.ifft(g2h)
    zg1, zg2, mod2 = _products_hat(grid, zeta, g1, g2, dealias)
    A, aB = coeffs.A, coeffs.alpha * coeffs.B
    ikx, iky = grid.ikx, grid.iky
    z_t = -A * (ikx * g1h + iky * g2h) - aB * (ikx * zg1 + iky * zg2)
    helm = 1.0 / (1.0 + coeffs.regularization_length2 * grid.k2)
    phi = helm * (coeffs.gprime * zh + 0.5 * aB * mod2)
    return z_t, -ikx * phi, -iky * phi


_RHS = {"raw": _rhs_raw_hat, "regularized": _rhs_reg_hat}


def _to_hat(state):
    grid = state.grid
    return tuple(grid.fft(f.values) for f in state.fields())


def _from_hat(grid, hats, time, representation):
    z, g1, g2 = (Field2D(grid, grid.ifft(h)) for h in hats)
    return KBKState(z, g1, g2, time, representation)


def rhs_raw(state, coeffs, dealias=True):
    """Time derivative of a raw state (returned as a raw KBKState)."""
    _require(state, "raw")
    grid = state.grid
    hats = _rhs_raw_hat(grid, coeffs, *_to_hat(state), dealias=dealias)
    return _from_hat(grid, hats, state.time, "raw")


def rhs_regularized(state, coeffs, dealias=True):
    """Time derivative of a regularized state (zeta, gamma-bar)."""
    _require(state, "regularized")
    grid = state.grid
    hats = _rhs_reg_hat(grid, coeffs, *_to_hat(state), dealias=dealias)
    return _from_hat(grid, hats, state.time, "regularized")


# Change of variables.

def illposed_cutoff_k2(coeffs):
    """|k|^2 beyond which the raw linearization has complex frequencies."""
    disp = coeffs.epsilon**2 * coeffs.kappa
    return math.inf if disp == 0 else 3 * coeffs.A / disp


def to_regularized(state, coeffs):
    """gamma-bar = gamma + (eps^2 kappa / 3A) Lap gamma (exact multiplier)."""
    _require(state, "raw")
    c = coeffs.regularization_length2
    mult = 1.0 - c * state.grid.k2
    g1 = f2._spectral(state.gamma1, mult)
    g2 = f2._spectral(state.gamma2, mult)
    return KBKState(state.zeta, g1, g2, state.time, "regularized")


def from_regularized(state, coeffs, warn=True):
    """Asymptotic inverse gamma = gamma-bar - (eps^2 kappa / 3A) Lap gamma-bar.

    Accurate to O(eps^4 |k|^4); warns when the state has energy at
    wavenumbers beyond half of the zero crossing |k|^2 = 3A / (eps^2 kappa).
    """
    _require(state, "regularized")
    grid = state.grid
    c = coeffs.regularization_length2
    if warn and c > 0:
        high = grid.k2 > 0.5 / c
        if np.any(high):
            e_hi = sum(grid.spectral_energy(grid.fft(g.values), high)
                       for g in (state.gamma1, state.gamma2))
            e_all = sum(f2.spectral_energy(g) for g in (state.gamma1, state.gamma2))
            if e_all > 0 and e_hi > 1e-12 * e_all:
                warnings.warn(
                    "regularized state has energy near the multiplier zero "
                    f"crossing (fraction {e_hi / e_all:.2e}); inverse is inaccurate",
                    RuntimeWarning, stacklevel=2)
    mult = 1.0 + c * grid.k2
    g1 = f2._spectral(state.gamma1, mult)
    g2 = f2._spectral(state.gamma2, mult)
    return KBKState(state.zeta, g1, g2, state.time, "raw")


def as_raw(state, coeffs):
    return state if state.representation == "raw" else from_regularized(state, coeffs)


# Dispersion and stability.

def dispersion(k, gamma0, coeffs, regularized=False):
    """Linear frequencies about the constant state (0, gamma0).

    Returns ``(omega_plus, omega_minus, illposed)``. Frequencies are complex;
    in the raw relation they acquire an imaginary part when ``illposed``.
    """
    kx, ky = (float(v) for v in k)
    k2 = kx * kx + ky * ky
    shift = coeffs.alpha * coeffs.B * (kx * gamma0[0] + ky * gamma0[1])
    if regularized:
        rhs = coeffs.gprime * k2 * coeffs.A / (
            1 + coeffs.epsilon**2 / 3 * coeffs.kappa / coeffs.A * k2)
    else:
        rhs = coeffs.gprime * k2 * (coeffs.A - coeffs.epsilon**2 / 3 * coeffs.kappa * k2)
    root = np.sqrt(complex(rhs))
    return shift + root, shift - root, bool(rhs < 0)


def max_frequency(grid, coeffs, representation="regularized", state=None):
    k2 = grid.k2
    disp = coeffs.epsilon**2 / 3 * coeffs.kappa
    if representation == "regularized":
        w2 = coeffs.gprime * coeffs.A * k2 / (1 + disp / coeffs.A * k2)
    else:
        w2 = np.abs(coeffs.gprime * k2 * (coeffs.A - disp * k2))
    omega = float(np.sqrt(np.max(w2)))
    if state is not None:
        gmax = max(state.gamma1.max_abs(), state.gamma2.max_abs())
        omega += abs(coeffs.alpha * coeffs.B) * gmax * float(np.sqrt(np.max(k2)))
    return omega


def stability_bound(grid, coeffs, representation="regularized", state=None):
    """Largest RK4 step: 2.5 / max |omega| over the grid's modes."""
    omega = max_frequency(grid, coeffs, representation, state)
    return math.inf if omega == 0 else RK4_STABILITY / omega


# Time stepping.

def _rk4(rhs, hats, dt):
    k1 = rhs(*hats)
    k2 = rhs(*(h + 0.5 * dt * k for h, k in zip(hats, k1)))
    k3 = rhs(*(h + 0.5 * dt * k for h, k in zip(hats, k2)))
    k4 = rhs(*(h + dt * k for h, k in zip(hats, k3)))
    return tuple(h + dt / 6 * (a + 2 * b + 2 * c + d)
                 for h, a, b, c, d in zip(hats, k1, k2, k3, k4))


def step(state, coeffs, dt, dealias=True):
    """One classical RK4 step in the state's own representation."""
    grid = state.grid
    rhs_hat = _RHS[state.representation]

    def rhs(*hats):
        return rhs_hat(grid, coeffs, *hats, dealias=dealias)

    hats = _rk4(rhs, _to_hat(state), dt)
    return _from_hat(grid, hats, state.time + dt, state.representation)


def hamiltonian(state, coeffs, dealias=True):
    """H = 1/2 int((A + alpha B zeta)|gamma|^2 + eps^2 kappa/3 gamma.Lap gamma + g' zeta^2).

    Regularized states are converted with :func:`from_regularized` first.
    With ``dealias`` the cubic term is evaluated as int zeta * P(|gamma|^2),
    the Galerkin-consistent quadrature.
    """
    state = as_raw(state, coeffs)
    grid = state.grid
    z, g1, g2 = (f.values for f in state.fields())
    mod2 = g1 * g1 + g2 * g2
    cubic = grid.apply(mod2, grid.dealias_mask) if dealias else mod2
    lap = -grid.k2
    disp = coeffs.epsilon**2 / 3 * coeffs.kappa
    g_lap_g = g1 * grid.apply(g1, lap) + g2 * grid.apply(g2, lap)
    density = (coeffs.A * mod2 + coeffs.alpha * coeffs.B * z * cubic
               + disp * g_lap_g + coeffs.gprime * z * z)
    return 0.5 * grid.quad(density)


def invariants(state, coeffs, dealias=True):
    """Conserved quantities and the curl constraint of a state.

    Momenta and angular momentum are evaluated in raw variables. The angular
    momentum uses box-centred coordinates and is flagged unreliable when the
    fields do not decay below 1e-10 at the box edge.
    """
    raw = as_raw(state, coeffs)
    grid = raw.grid
    z, g1, g2 = raw.fields()
    X, Y = grid.mesh()
    edge = max(f2.edge_magnitude(f.values) for f in (z, g1, g2))
    return InvariantReport(
        time=state.time,
        H=hamiltonian(raw, coeffs, dealias),
        mass=f2.integral(z),
        gamma_flux=(f2.integral(g1), f2.integral(g2)),
        M1=f2.integral(z * g1),
        M2=f2.integral(z * g2),
        Lrot=grid.quad(z.values * (X * g2.values - Y * g1.values)),
        curl_norm=state.curl_norm(),
        lrot_reliable=edge <= 1e-10,
    )


def _highband_energy(grid, hats, mask):
    return sum(grid.spectral_energy(h, mask) for h in hats[1:])


def evolve(state, coeffs, config: SolverConfig,
           callback: Optional[Callable[[KBKState, int], None]] = None):
    """Integrate from ``state.time`` to ``state.time + config.t_end``.

    The state is converted to ``config.representation`` first. Invariant
    reports (raw variables) are recorded every ``invariant_every`` steps and
    snapshots every ``snapshot_every`` steps (0 disables), both including the
    initial and final states. The step is shortened so that ``t_end`` is hit
    exactly.
    """
    if config.representation == "regularized" and state.representation == "raw":
        state = to_regularized(state, coeffs)
    elif config.representation == "raw" and state.representation == "regularized":
        state = from_regularized(state, coeffs)
    grid = state.grid
    rep = state.representation
    bound = stability_bound(grid, coeffs, rep, state)
    dt = config.dt if config.dt is not None else 0.5 * bound
    nsteps = max(1, math.ceil(config.t_end / dt - 1e-9)) if config.t_end > 0 else 0
    if nsteps:
        dt = config.t_end / nsteps
    if dt > bound * (1 + 1e-12):
        warnings.warn(f"dt={dt:.4g} exceeds the RK4 stability bound {bound:.4g}",
                      RuntimeWarning, stacklevel=2)

    rhs_hat = _RHS[rep]

    def rhs(*hats):
        return rhs_hat(grid, coeffs, *hats, dealias=config.dealias)

    traj = Trajectory(final=state, dt=dt)

    def record(st, n, force=False):
        if config.invariant_every and (n % config.invariant_every == 0 or force):
            traj.invariants.append(invariants(st, coeffs, config.dealias))
        if config.snapshot_every and (n % config.snapshot_every == 0 or force):
            traj.snapshots.append(st)
        if callback is not None:
            callback(st, n)

    record(state, 0)
    hats = _to_hat(state)
    t0 = state.time
    guard_mask = None
    if rep == "raw":
        cutoff = illposed_cutoff_k2(coeffs)
        above = grid.k2 > cutoff
        if np.any(above):
            guard_mask = above
            total = sum(grid.spectral_energy(h) for h in hats[1:])
            baseline = max(_highband_energy(grid, hats, guard_mask), 1e-28 * total, 1e-300)

    for n in range(1, nsteps + 1):
        hats = _rk4(rhs, hats, dt)
        if not all(np.all(np.isfinite(h)) for h in hats):
            raise NumericalAbort("non-finite values in the solution", step=n)
        if guard_mask is not None:
            e_hi = _highband_energy(grid, hats, guard_mask)
            if e_hi > config.growth_guard * baseline:
                raise NumericalAbort(
                    "energy beyond the ill-posedness cutoff grew by more than "
                    f"x{config.growth_guard:g}; use the regularized representation",
                    step=n)
        last = n == nsteps
        need = (config.invariant_every and n % config.invariant_every == 0) or \
            (config.snapshot_every and n % config.snapshot_every == 0) or \
            last or callback is not None
        if need:
            current = _from_hat(grid, hats, t0 + n * dt, rep)
            record(current, n, force=last)
            traj.final = current
    traj.steps = nsteps
    return traj


def rotate90(state):
    """Rotate a state by +pi/2 about the box centre (square grids only).

    Scalar fields map as f'(x, y) = f(y, -x); the shear vector is rotated too.
    """
    grid = state.grid
    if grid.nx != grid.ny or grid.lx != grid.ly:
        raise ValueError("grid-exact rotation needs a square grid")
    src = (-np.arange(grid.nx)) % grid.nx

    def rot_field(f):
        # new[j, i] = old[src[i], j]
        return Field2D(grid, f.values[src, :].T.copy())

    z = rot_field(state.zeta)
    g1 = rot_field(state.gamma1)
    g2 = rot_field(state.gamma2)
    return KBKState(z, -g2, g1, state.time, state.representation)


def check_curl(state, tol=1e-8):
    norm = state.curl_norm()
    if norm > tol:
        raise ConstraintViolation(f"curl of gamma is {norm:.3e} > {tol:.1e}")
    return norm
