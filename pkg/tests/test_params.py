import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from twolayer.errors import ParameterError
from twolayer.params import (ModelCoefficients, PhysicalParams, critical_depth_ratio,
                             derive_coefficients, energy_scale, redimensionalize_shear,
                             shear_scale, validate_regime)

positive = st.floats(0.1, 10.0)


@st.composite
def physical(draw):
    rho1 = draw(positive)
    rho2 = rho1 * draw(st.floats(1.001, 5.0))
    return PhysicalParams(rho1=rho1, rho2=rho2, h1=draw(positive), h2=draw(positive))


def test_reference_values():
    c = derive_coefficients(PhysicalParams(rho1=1, rho2=2, h1=1, h2=1))
    assert c.A == pytest.approx(0.25, abs=1e-15)
    assert c.B == pytest.approx(1 / 6, abs=1e-15)
    assert c.kappa == pytest.approx(1 / 16, abs=1e-15)
    assert c.c0 == pytest.approx(0.5, abs=1e-15)
    assert c.alpha == pytest.approx(0.01)
    assert c.epsilon == pytest.approx(0.1)
    assert c.beta == 0.0


def test_critical_ratio_example_gives_zero_b():
    c = derive_coefficients(PhysicalParams(rho1=1, rho2=4, h1=1, h2=2))
    assert c.B == 0.0


@pytest.mark.parametrize("rho1, rho2", [(1, 2), (0.5, 3), (1000, 1025)])
def test_equal_depths_give_quarter(rho1, rho2):
    c = derive_coefficients(PhysicalParams(rho1=rho1, rho2=rho2, h1=2.5, h2=2.5))
    assert c.A == 0.25


@pytest.mark.parametrize("rho1, rho2, expected", [(1, 4, 0.5), (1, 2, 0.7071067811865476)])
def test_critical_depth_ratio(rho1, rho2, expected):
    assert critical_depth_ratio(rho1, rho2) == pytest.approx(expected, abs=1e-16)


@pytest.mark.parametrize("rho1, rho2", [(2, 1), (1, 1), (-1, 2), (0, 1)])
def test_critical_depth_ratio_rejects(rho1, rho2):
    with pytest.raises(ParameterError):
        critical_depth_ratio(rho1, rho2)


@pytest.mark.parametrize("kwargs", [
    dict(rho1=2, rho2=1), dict(rho1=1, rho2=1), dict(h1=0), dict(h2=-1),
    dict(g=0), dict(L=0), dict(a=-0.1), dict(Lprime=0)])
def test_invalid_parameters(kwargs):
    with pytest.raises(ParameterError):
        PhysicalParams(**kwargs)


def test_unknown_convention():
    with pytest.raises(ParameterError):
        derive_coefficients(PhysicalParams(), convention="other")


def test_unit_convention_and_beta():
    p = PhysicalParams(Lprime=200.0)
    assert derive_coefficients(p).beta == pytest.approx(0.1)
    u = derive_coefficients(p, convention="unit")
    assert (u.alpha, u.epsilon, u.beta) == (1.0, 1.0, 1.0)
    assert u.A == derive_coefficients(p).A


@pytest.mark.parametrize("alpha, eps, ratio, flag", [
    (0.01, 0.1, 1.0, "ok"), (0.5, 0.1, 50.0, "warn"), (0.0005, 0.1, 0.05, "warn")])
def test_validate_regime_alpha(alpha, eps, ratio, flag):
    r = validate_regime(ModelCoefficients(0.25, 1 / 6, 1 / 16, alpha=alpha, epsilon=eps))
    assert r.alpha_over_eps2 == pytest.approx(ratio)
    assert r.alpha_flag == flag


def test_validate_regime_beta():
    r = validate_regime(ModelCoefficients(0.25, 1 / 6, 1 / 16, alpha=0.01, epsilon=0.1,
                                          beta=0.1))
    assert r.beta_over_eps == pytest.approx(1.0)
    assert r.beta_flag == "ok"
    assert r.ok
    off = validate_regime(ModelCoefficients(0.25, 1 / 6, 1 / 16))
    assert off.beta_flag == "off"


def test_scales():
    p = PhysicalParams(rho1=1, rho2=2, h1=1, h2=3, g=9.81)
    assert shear_scale(p) == pytest.approx(math.sqrt(9.81 * 1 * (2 + 3)))
    assert energy_scale(p) == pytest.approx(9.81 * 16)
    assert redimensionalize_shear(2.0, p) == pytest.approx(2 * shear_scale(p))


@given(physical(), st.floats(0.1, 5.0))
def test_coefficient_invariants(p, gprime):
    c = derive_coefficients(p, gprime)
    assert 0 < c.A <= 0.25
    assert c.A * p.h**2 == pytest.approx(p.h1 * p.h2, rel=1e-14)
    assert c.kappa > 0
    assert c.c0**2 == pytest.approx(c.A * gprime, rel=1e-15)
    numerator = p.rho2 * p.h1**2 - p.rho1 * p.h2**2
    if abs(numerator) > 1e-12:
        assert math.copysign(1, c.B) == math.copysign(1, numerator)


@given(physical())
def test_exchange_symmetry(p):
    # swapping the layers (rho1, h1) <-> (rho2, h2) flips B and keeps A, kappa;
    # the swapped pair is not a stable stratification, so use the formulas
    # through a mirrored parameter set with the same magnitudes.
    def coeffs(r1, h1, r2, h2):
        h = h1 + h2
        A = h1 * h2 / h**2
        B = (r2 * h1**2 - r1 * h2**2) / (h * (r2 * h1 + r1 * h2))
        kappa = h1**2 * h2**2 * (r1 * h1 + r2 * h2) / (h**4 * (r2 * h1 + r1 * h2))
        return A, B, kappa

    c = derive_coefficients(p)
    A, B, kappa = coeffs(p.rho2, p.h2, p.rho1, p.h1)
    assert (c.A, c.kappa) == (pytest.approx(A, rel=1e-14), pytest.approx(kappa, rel=1e-14))
    assert c.B == pytest.approx(-B, rel=1e-12, abs=1e-15)


@given(st.floats(0.01, 100.0), st.floats(1.001, 50.0), st.floats(0.1, 10.0))
def test_critical_ratio_zeroes_b(rho1, factor, h2):
    rho2 = rho1 * factor
    h1 = critical_depth_ratio(rho1, rho2) * h2
    c = derive_coefficients(PhysicalParams(rho1=rho1, rho2=rho2, h1=h1, h2=h2))
    assert abs(c.B) <= 1e-14
