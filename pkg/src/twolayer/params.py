"""Physical two-layer parameters and the nondimensional model coefficients.

All solver fields are nondimensional. Interface displacement is measured in
units of the amplitude scale ``a`` and horizontal coordinates in units of
``L``; the shear variables are scaled by ``sqrt(g (rho2-rho1)(rho2 h1 + rho1 h2))``
(see :func:`shear_scale`). Time is the rescaled time obtained after dividing the
energy density by ``g h^2 (rho2 - rho1)`` (see :func:`energy_scale`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import ParameterError

REGIME_BAND = (0.1, 10.0)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional hardware parameters of the two-layer channel.

    Layer 1 is the upper (lighter) fluid, layer 2 the lower one.
    """

    rho1: float = 1.0
    rho2: float = 2.0
    h1: float = 1.0
    h2: float = 1.0
    g: float = 1.0
    L: float = 20.0
    a: float = 0.02
    Lprime: Optional[float] = None

    def __post_init__(self):
        if not (self.rho1 > 0):
            raise ParameterError(f"rho1 must be positive, got {self.rho1}")
        if not (self.rho2 > self.rho1):
            raise ParameterError(
                "stable stratification requires rho2 > rho1 "
                f"(got rho1={self.rho1}, rho2={self.rho2})")
        for name in ("h1", "h2", "g", "L", "a"):
            value = getattr(self, name)
            if not (value > 0):
                raise ParameterError(f"{name} must be positive, got {value}")
        if self.Lprime is not None and not (self.Lprime > 0):
            raise ParameterError(f"Lprime must be positive, got {self.Lprime}")

    @property
    def h(self):
        return self.h1 + self.h2


@dataclass(frozen=True)
class ModelCoefficients:
    """Nondimensional coefficients of the KBK-Boussinesq and KP models.

    ``h1_frac`` and ``h2_frac`` are the layer depths relative to the total
    depth; they bound admissible soliton amplitudes. ``physical`` keeps the
    originating :class:`PhysicalParams` when available (needed for velocity
    and pressure reconstruction).
    """

    A: float
    B: float
    kappa: float
    gprime: float = 1.0
    alpha: float = 1.0
    epsilon: float = 1.0
    beta: float = 0.0
    h1_frac: float = 0.5
    h2_frac: float = 0.5
    physical: Optional[PhysicalParams] = None

    def __post_init__(self):
        if not (0 < self.A <= 0.25 + 1e-15):
            raise ParameterError(f"A must lie in (0, 1/4], got {self.A}")
        if not (self.kappa > 0):
            raise ParameterError(f"kappa must be positive, got {self.kappa}")
        if not (self.gprime > 0):
            raise ParameterError(f"gprime must be positive, got {self.gprime}")

    @property
    def c0(self):
        """Linear long-wave speed sqrt(A g')."""
        return math.sqrt(self.A * self.gprime)

    @property
    def regularization_length2(self):
        """Coefficient eps^2 kappa / (3A) of the regularizing Laplacian."""
        return self.epsilon**2 * self.kappa / (3.0 * self.A)

    def with_unit_convention(self):
        """Same hardware coefficients with alpha = eps^2 = beta^2 = 1."""
        return replace(self, alpha=1.0, epsilon=1.0, beta=1.0)


@dataclass(frozen=True)
class RegimeReport:
    alpha_over_eps2: float
    alpha_flag: str
    beta_over_eps: float
    beta_flag: str

    @property
    def ok(self):
        return self.alpha_flag == "ok" and self.beta_flag in ("ok", "off")


def derive_coefficients(p: PhysicalParams, gprime=1.0, convention="scaled"):
    """Map physical parameters to :class:`ModelCoefficients`.

    With ``convention="scaled"`` the small parameters are alpha = a/h,
    epsilon = h/L and beta = L/L' (0 without a transverse scale). With
    ``convention="unit"`` they are all set to one, the presentation used for
    the closed-form solutions.
    """
    if convention not in ("scaled", "unit"):
        raise ParameterError(f"unknown convention {convention!r}")
    r1, r2, h1, h2 = p.rho1, p.rho2, p.h1, p.h2
    h = p.h
    A = h1 * h2 / h**2
    B = (r2 * h1**2 - r1 * h2**2) / (h * (r2 * h1 + r1 * h2))
    kappa = h1**2 * h2**2 * (r1 * h1 + r2 * h2) / (h**4 * (r2 * h1 + r1 * h2))
    if convention == "scaled":
        alpha = p.a / h
        epsilon = h / p.L
        beta = p.L / p.Lprime if p.Lprime is not None else 0.0
    else:
        alpha = epsilon = beta = 1.0
    return ModelCoefficients(A=A, B=B, kappa=kappa, gprime=gprime, alpha=alpha,
                             epsilon=epsilon, beta=beta, h1_frac=h1 / h,
                             h2_frac=h2 / h, physical=p)


def critical_depth_ratio(rho1, rho2):
    """Depth ratio h1/h2 at which the nonlinear coefficient B vanishes."""
    if not (0 < rho1 < rho2):
        raise ParameterError(
            f"need 0 < rho1 < rho2, got rho1={rho1}, rho2={rho2}")
    return math.sqrt(rho1 / rho2)


def _flag(ratio):
    lo, hi = REGIME_BAND
    return "ok" if lo <= ratio <= hi else "warn"


def validate_regime(c: ModelCoefficients):
    """Check the weakly nonlinear balances alpha ~ eps^2 and beta ~ eps.

    Advisory only: out-of-band ratios are flagged ``"warn"``, never raised.
    """
    eps = c.epsilon
    a_ratio = c.alpha / eps**2 if eps > 0 else math.inf
    if c.beta == 0:
        b_ratio, b_flag = 0.0, "off"
    else:
        b_ratio = c.beta / eps if eps > 0 else math.inf
        b_flag = _flag(b_ratio)
    return RegimeReport(a_ratio, _flag(a_ratio), b_ratio, b_flag)


def shear_scale(p: PhysicalParams):
    """Factor converting nondimensional (sigma, tau, gamma) to physical units."""
    return math.sqrt(p.g * (p.rho2 - p.rho1) * (p.rho2 * p.h1 + p.rho1 * p.h2))


def energy_scale(p: PhysicalParams):
    """Energy-density factor D = g h^2 (rho2 - rho1) absorbed into time."""
    return p.g * p.h**2 * (p.rho2 - p.rho1)


def redimensionalize_shear(values, p: PhysicalParams):
    return values * shear_scale(p)
