"""Layer velocities, vertical velocity and interfacial pressure from a state.

The reduced variables are the weighted vorticity sheet (sigma, tau), tied
to the shear vector by gamma = (-tau, sigma). Velocities are returned in
the same nondimensional units as the sheet variables; they depend on the
dimensional densities and depths, so the coefficients must carry the
originating :class:`~twolayer.params.PhysicalParams`.

Weakly nonlinear corrections use the full horizontal Laplacian. For
y-independent data this is the same as the second x-derivative.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from . import field2d as f2
from .field2d import Field2D
from .kbk import as_raw

ORDERS = ("leading", "wnl")


@dataclass(frozen=True, eq=False)
class LayerVelocities:
    """Interface traces (``*t``) and, once filled, layer averages (``*bar*``)."""

    u1t: Field2D
    v1t: Field2D
    u2t: Field2D
    v2t: Field2D
    ubar1: Optional[Field2D] = None
    vbar1: Optional[Field2D] = None
    ubar2: Optional[Field2D] = None
    vbar2: Optional[Field2D] = None

    def trace(self, layer):
        return (self.u1t, self.v1t) if layer == 1 else (self.u2t, self.v2t)


def _physical(coeffs):
    if coeffs.physical is None:
        raise ValueError("velocity reconstruction needs coefficients derived "
                         "from PhysicalParams")
    return coeffs.physical


def interface_velocities(state, coeffs, order="leading"):
    """Horizontal velocities of both layers at the interface.

    ``leading`` inverts the sheet definition with the mass constraint at
    O(1); ``wnl`` adds the eps^2 dispersive and alpha nonlinear corrections.
    """
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}, got {order!r}")
    state = as_raw(state, coeffs)
    p = _physical(coeffs)
    r1, r2, h1, h2, h = p.rho1, p.rho2, p.h1, p.h2, p.h
    D = r2 * h1 + r1 * h2
    sigma, tau = state.sigma, state.tau
    u1 = (h2 / D) * tau
    u2 = (-h1 / D) * tau
    v1 = (-h2 / D) * sigma
    v2 = (h1 / D) * sigma
    if order == "wnl":
        disp = coeffs.epsilon**2 / 3 * h1 * h2 * (h1 - h2) / (h * D**2)
        nl = coeffs.alpha * h**2 / D**2
        lap_tau = f2.laplacian(tau)
        lap_sigma = f2.laplacian(sigma)
        zt = f2.dealias(state.zeta * tau)
        zs = f2.dealias(state.zeta * sigma)
        u1 = u1 - disp * r2 * lap_tau + nl * r2 * zt
        u2 = u2 - disp * r1 * lap_tau + nl * r1 * zt
        v1 = v1 + disp * r2 * lap_sigma - nl * r2 * zs
        v2 = v2 + disp * r1 * lap_sigma - nl * r1 * zs
    return LayerVelocities(u1, v1, u2, v2)


def layer_averaged(vel: LayerVelocities, coeffs):
    """Fill the layer averages: ubar_i = u_i + (eps^2/3)(h_i/h)^2 Lap u_i."""
    p = _physical(coeffs)
    e2 = coeffs.epsilon**2 / 3

    def avg(f, hi):
        return f + e2 * (hi / p.h) ** 2 * f2.laplacian(f)

    return replace(vel, ubar1=avg(vel.u1t, p.h1), vbar1=avg(vel.v1t, p.h1),
                   ubar2=avg(vel.u2t, p.h2), vbar2=avg(vel.v2t, p.h2))


def layer_range(coeffs, layer):
    """Nondimensional vertical extent of a layer; the interface rests at 0."""
    p = _physical(coeffs)
    if layer == 1:
        return 0.0, p.h1 / p.h
    if layer == 2:
        return -p.h2 / p.h, 0.0
    raise ValueError(f"layer must be 1 or 2, got {layer!r}")


def vertical_velocity(vel: LayerVelocities, coeffs, z, layer):
    """Leading-order vertical velocity, linear in z and zero at the wall."""
    lo, hi = layer_range(coeffs, layer)
    if not lo <= z <= hi:
        raise ValueError(f"z={z} outside layer {layer} range [{lo}, {hi}]")
    u, v = vel.trace(layer)
    wall = lo if layer == 2 else hi
    return -coeffs.epsilon * (z - wall) * f2.div2(u, v)


class Pressure(NamedTuple):
    field: Field2D
    stationary: bool
    residual: float


def interfacial_pressure(state, coeffs, stationary_tol=1e-8):
    """Interfacial pressure from the Bernoulli relation along the interface.

    P = -rho2 g h zeta - (alpha/2) g h h1^2 (rho2 - rho1) rho2 / D^2 |gamma|^2
    with D = rho2 h1 + rho1 h2. The relation holds for stationary states;
    ``stationary`` reports whether zeta matches the stationary balance
    -alpha B |gamma|^2 / (2 g') within ``stationary_tol`` (max-norm).
    """
    state = as_raw(state, coeffs)
    p = _physical(coeffs)
    D = p.rho2 * p.h1 + p.rho1 * p.h2
    mod2 = state.gamma1**2 + state.gamma2**2
    k = p.g * p.h * p.h1**2 * (p.rho2 - p.rho1) * p.rho2 / D**2
    P = -p.rho2 * p.g * p.h * state.zeta - 0.5 * coeffs.alpha * k * mod2
    balance = state.zeta + (coeffs.alpha * coeffs.B / (2 * coeffs.gprime)) * mod2
    residual = balance.max_abs()
    return Pressure(P, residual <= stationary_tol, residual)


def vorticity_sheet_check(state, coeffs=None):
    """Return (chi, max |sigma_x + tau_y|) for a raw state.

    chi = zeta_x sigma + zeta_y tau is the normal sheet component.
    """
    if coeffs is not None:
        state = as_raw(state, coeffs)
    elif state.representation != "raw":
        raise ValueError("vorticity_sheet_check needs a raw state or coefficients")
    zeta, sigma, tau = state.zeta, state.sigma, state.tau
    chi = f2.ddx(zeta) * sigma + f2.ddy(zeta) * tau
    div = f2.ddx(sigma) + f2.ddy(tau)
    return chi, div.max_abs()


def mass_constraint_residual(vel: LayerVelocities, coeffs):
    """Max-norm of h1 u1 + h2 u2 and h1 v1 + h2 v2 (zero at leading order)."""
    p = _physical(coeffs)
    ru = p.h1 * vel.u1t + p.h2 * vel.u2t
    rv = p.h1 * vel.v1t + p.h2 * vel.v2t
    return max(ru.max_abs(), rv.max_abs())


def sheet_residual(vel: LayerVelocities, state, coeffs):
    """Max-norm of (rho2 v2 - rho1 v1 - sigma, rho2 u2 - rho1 u1 + tau)."""
    p = _physical(coeffs)
    state = as_raw(state, coeffs)
    rs = p.rho2 * vel.v2t - p.rho1 * vel.v1t - state.sigma
    rt = p.rho2 * vel.u2t - p.rho1 * vel.u1t + state.tau
    return max(rs.max_abs(), rt.max_abs())


def pressure_extrema(P: Field2D):
    v = P.values
    return float(np.min(v)), float(np.max(v))
