"""Acceptance suite: the nine primary criteria at their stated tolerances.

Every test prints one ``PASS``/``FAIL`` line with the measured numbers,
visible under ``pytest -v`` because the printing bypasses capture.
"""
import math
import time

import numpy as np
import pytest

from conftest import band_limited, random_state
from twolayer import closed_form as cf
from twolayer import field2d as f2
from twolayer import kbk, kp
from twolayer.errors import SpeedWindowError
from twolayer.field2d import Field2D, Grid2D
from twolayer.params import PhysicalParams, derive_coefficients

SCALED = derive_coefficients(PhysicalParams())


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, seconds):
        with capsys.disabled():
            print(f"\n[acceptance #{number}] {'PASS' if ok else 'FAIL'}: {detail} "
                  f"({seconds:.2f} s)")
    return emit


def test_1_critical_ratio_zero(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(50):
        rho1 = rng.uniform(0.5, 2.0)
        rho2 = rho1 * rng.uniform(1.0001, 1.5)
        p = PhysicalParams(rho1=rho1, rho2=rho2, h1=math.sqrt(rho1 / rho2), h2=1.0)
        worst = max(worst, abs(derive_coefficients(p).B))
    seconds = time.perf_counter() - t0
    ok = worst <= 1e-14 and seconds < 1
    report(1, ok, f"max |B| at critical ratio = {worst:.2e} (tol 1e-14)", seconds)
    assert worst <= 1e-14
    assert seconds < 1


@pytest.mark.parametrize("coeffs_kind", ["scaled", "elevation", "depression"])
def test_2_soliton_crest_identities(report, coeffs_kind):
    coeffs = {
        "scaled": SCALED,
        "elevation": derive_coefficients(PhysicalParams(), convention="unit"),
        "depression": derive_coefficients(PhysicalParams(h1=1.5, h2=0.5), convention="unit"),
    }[coeffs_kind]
    t0 = time.perf_counter()
    lo, hi = cf.soliton_speed_window(coeffs)
    aB = coeffs.alpha * coeffs.B
    worst = 0.0
    for c in np.linspace(lo, hi, 22)[1:-1]:
        zeta, gamma = cf.kbk_soliton_profile(cf.SolitonSpec(c, coeffs), np.array([0.0]))
        gamma_m = 2 * (c - coeffs.c0) / aB
        zeta_m = 2 * coeffs.A * (c - coeffs.c0) / (coeffs.c0 * aB)
        worst = max(worst, abs(gamma[0] - gamma_m), abs(zeta[0] - zeta_m))
    seconds = time.perf_counter() - t0
    report(2, worst <= 1e-12 and seconds < 1,
           f"{coeffs_kind}: max crest mismatch over 20 speeds = {worst:.2e} (tol 1e-12)",
           seconds)
    assert worst <= 1e-12
    assert seconds < 1


def test_3_newton_residual(report):
    t0 = time.perf_counter()
    lo, hi = cf.soliton_speed_window(SCALED)
    residuals = [cf.newton_residual(cf.SolitonSpec(lo + f * (hi - lo), SCALED), n=512)
                 for f in (0.25, 0.5, 0.75)]
    seconds = time.perf_counter() - t0
    worst = max(residuals)
    report(3, worst <= 1e-8 and seconds < 5,
           f"max Newton-ODE residual at nx=512, half-width 40/c_Delta = {worst:.2e} "
           f"(tol 1e-8)", seconds)
    assert worst <= 1e-8
    assert seconds < 5


def test_4_dispersion(report):
    t0 = time.perf_counter()
    coeffs = SCALED
    grid = Grid2D(128, 128, 40.0, 40.0)
    mx, my = 3, 2
    kx, ky = 2 * np.pi * mx / grid.lx, 2 * np.pi * my / grid.ly
    k = math.hypot(kx, ky)
    omega = kbk.dispersion((kx, ky), (0.0, 0.0), coeffs, regularized=True)[0].real
    # right-going eigenmode: zeta = a cos(k.x), gamma-bar along k
    amp = 1e-6
    X, Y = grid.mesh()
    wave = np.cos(kx * X + ky * Y)
    g = omega * amp / (coeffs.A * k)
    state = kbk.KBKState(Field2D(grid, amp * wave), Field2D(grid, g * kx / k * wave),
                         Field2D(grid, g * ky / k * wave), 0.0, "regularized")
    period = 2 * np.pi / omega
    bound = kbk.stability_bound(grid, coeffs, "regularized")
    nsteps = math.ceil(5 * period / (bound / 4))
    dt = 5 * period / nsteps
    phases = [np.angle(grid.fft(state.zeta.values)[my, mx])]
    for _ in range(nsteps):
        state = kbk.step(state, coeffs, dt)
        phases.append(np.angle(grid.fft(state.zeta.values)[my, mx]))
    unwrapped = np.unwrap(phases)
    measured = -(unwrapped[-1] - unwrapped[0]) / (nsteps * dt)
    rel = abs(measured - omega) / omega

    cut = kbk.illposed_cutoff_k2(coeffs)
    oracle_cut = 3 * coeffs.A / (coeffs.epsilon**2 * coeffs.kappa)
    flags = []
    for r in (1e-12, 1e-9, 1e-6):
        flags.append(kbk.dispersion((math.sqrt(oracle_cut * (1 - r)), 0), (0, 0), coeffs)[2])
        flags.append(not kbk.dispersion((math.sqrt(oracle_cut * (1 + r)), 0), (0, 0), coeffs)[2])
        flags.append(kbk.dispersion((0, math.sqrt(oracle_cut * (1 + r))), (0, 0), coeffs,
                                    regularized=True)[2])
    flips = not any(flags) and cut == pytest.approx(oracle_cut, rel=1e-14)
    seconds = time.perf_counter() - t0
    report(4, rel <= 1e-6 and flips and seconds < 30,
           f"omega rel error {rel:.2e} over 5 periods ({nsteps} steps, tol 1e-6); "
           f"ill-posed flag flips at |k|^2 = {cut:.6g}: {flips}", seconds)
    assert rel <= 1e-6
    assert flips
    assert seconds < 30


def _gaussian_state(grid, amp=1.0, width=2.5):
    X, Y = grid.mesh()
    zeta = Field2D(grid, amp * np.exp(-((X - 1.0)**2 + (Y + 0.5)**2) / (2 * width**2)))
    phi = Field2D(grid, amp * np.exp(-((X + 0.7)**2 + (Y - 1.2)**2) / (2 * width**2)))
    return kbk.KBKState(zeta, f2.ddx(phi), f2.ddy(phi))


def test_5_conservation(report):
    t0 = time.perf_counter()
    grid = Grid2D(256, 256, 40.0, 40.0)
    state = kbk.to_regularized(_gaussian_state(grid), SCALED)
    assert f2.edge_magnitude(state.zeta.values) <= 1e-10
    traj = kbk.evolve(state, SCALED, kbk.SolverConfig(t_end=10.0, invariant_every=10))
    rows = np.array([r.row() for r in traj.invariants])
    names = kbk.INVARIANT_COLUMNS
    # int gamma starts at zero, so its drift is measured against int |gamma|
    gscale = max(float(np.sum(np.abs(g.values))) * grid.dx * grid.dy
                 for g in (state.gamma1, state.gamma2))
    drift = {}
    for i, name in enumerate(names[1:-1], start=1):
        col = rows[:, i]
        scale = gscale if name in ("gx", "gy") else abs(col[0])
        drift[name] = float(np.max(np.abs(col - col[0])) / scale)
    curl = float(rows[:, -1].max())
    tol = {name: 1e-8 for name in drift}
    tol["L"] = 1e-6
    failing = [n for n in drift if drift[n] > tol[n]]
    seconds = time.perf_counter() - t0
    ok = not failing and curl <= 1e-10 and traj.invariants[0].lrot_reliable and seconds < 300
    detail = ", ".join(f"{n} {drift[n]:.1e}" for n in drift)
    report(5, ok, f"relative drifts over t in [0,10]: {detail}; curl {curl:.1e}; "
           f"over tolerance: {failing or 'none'}", seconds)
    assert traj.invariants[0].lrot_reliable
    assert curl <= 1e-10
    assert seconds < 300
    assert not failing, f"drift above tolerance for {failing}: {drift}"


def test_6_soliton_transit(report):
    t0 = time.perf_counter()
    coeffs = derive_coefficients(PhysicalParams(rho1=1.0, rho2=1.005), convention="unit")
    lo, hi = cf.soliton_speed_window(coeffs)
    spec = cf.SolitonSpec(0.5 * (lo + hi), coeffs)
    grid = cf.soliton_grid(spec, nx=512, ny=8)
    state = cf.kbk_soliton_state(spec, grid)
    transit = grid.lx / spec.c
    bound = kbk.stability_bound(grid, coeffs, "raw", state)
    errors = []
    for frac in (0.5, 0.25):
        cfg = kbk.SolverConfig(t_end=transit, dt=frac * bound, representation="raw",
                               invariant_every=0)
        final = kbk.evolve(state, coeffs, cfg).final
        errors.append(max((a - b).max_abs() for a, b in zip(final.fields(), state.fields())))
    ratio = errors[0] / errors[1]
    seconds = time.perf_counter() - t0
    ok = errors[0] <= 1e-3 and ratio >= 14 and seconds < 300
    report(6, ok, f"one transit error {errors[0]:.2e} (tol 1e-3), halved dt "
           f"{errors[1]:.2e}, ratio {ratio:.1f} (need >= 14)", seconds)
    assert errors[0] <= 1e-3
    assert ratio >= 14
    assert seconds < 300


def test_7_kp_consistency(report):
    t0 = time.perf_counter()
    # Dirac identity on random band-limited states
    coeffs = derive_coefficients(PhysicalParams(Lprime=200.0))
    grid = Grid2D(64, 32, 20.0, 30.0)
    rng = np.random.default_rng(7)
    worst_id = worst_flow = literal = 0.0
    for _ in range(20):
        state = kp.KPState(band_limited(grid, rng, zero_kx0=True))
        dH = kp.kp_variational_derivative(state, coeffs, dealias=False)
        applied = kp.dirac_apply(state, dH, coeffs)
        exact = kp.rhs_kp(state, coeffs, dealias=False)
        worst_id = max(worst_id, (applied - kp.dirac_remainder(state, coeffs) - exact).max_abs())
        worst_flow = max(worst_flow, (kp.dirac_flow(state, coeffs) - kp.rhs_kp(state, coeffs)).max_abs())
        literal = max(literal, (applied - exact).max_abs())

    # line soliton crest speed over t in [0, 10]
    lo, hi = cf.kp_speed_window(SCALED)
    spec = cf.SolitonSpec(0.5 * (lo + hi), SCALED)
    sgrid = Grid2D(512, 8, 8.0, 1.0)
    traj = kp.kp_evolve(kp.KPState(cf.kp_line_soliton(spec, sgrid)), SCALED,
                        kbk.SolverConfig(t_end=10.0, invariant_every=0))
    x_end, _ = kp.crest(traj.final.zeta.values[0], sgrid.x[0], sgrid.lx)
    expected = (spec.c * 10.0 + sgrid.lx / 2) % sgrid.lx - sgrid.lx / 2
    shift = (x_end - expected + sgrid.lx / 2) % sgrid.lx - sgrid.lx / 2
    speed_err = abs(shift) / 10.0

    # embedded KP soliton against the full model at alpha = eps^2 = beta^2 = 0.01
    small = derive_coefficients(PhysicalParams(L=20.0, a=0.02, Lprime=200.0))
    assert small.alpha == pytest.approx(0.01) and small.epsilon**2 == pytest.approx(0.01)
    assert small.beta**2 == pytest.approx(0.01)
    lo, _ = cf.kp_speed_window(small)
    c = lo + small.gprime * small.alpha * small.B / (2 * small.c0)   # zeta_m = 1
    egrid = Grid2D(256, 8, 40.0, 4.0)
    kstate = kp.KPState(cf.kp_line_soliton(cf.SolitonSpec(c, small), egrid))
    cfg = kbk.SolverConfig(t_end=1.0, representation="raw", invariant_every=0)
    full = kbk.evolve(kp.embed_to_kbk(kstate, small), small, cfg).final
    reduced = kp.kp_evolve(kstate, small, cfg).final
    C = float(np.max(np.abs(full.zeta.values - reduced.zeta.values))) / small.alpha**2

    seconds = time.perf_counter() - t0
    ok = (worst_id <= 1e-12 and worst_flow <= 1e-12 and speed_err <= 1e-3 and C <= 10
          and seconds < 600)
    report(7, ok, f"Dirac identity {worst_id:.1e} and flow {worst_flow:.1e} (tol 1e-12, "
           f"literal second-order gap {literal:.1e}); crest speed error {speed_err:.1e} "
           f"(tol 1e-3); embedding C = {C:.3f} (need <= 10)", seconds)
    assert worst_id <= 1e-12 and worst_flow <= 1e-12
    assert speed_err <= 1e-3
    assert C <= 10
    assert seconds < 600


def test_8_structural_identities(report):
    t0 = time.perf_counter()
    grid = Grid2D(32, 32, 2 * np.pi, 2 * np.pi)
    rng = np.random.default_rng(8)
    poisson = skew = rotation = 0.0
    cfg = kbk.SolverConfig(t_end=0.5, invariant_every=0)
    for i in range(20):
        state = random_state(grid, rng)
        rhs = kbk.rhs_raw(state, SCALED)
        applied = kbk.apply_poisson(*kbk.variational_derivatives(state, SCALED))
        poisson = max(poisson, max((a - b).max_abs()
                                   for a, b in zip(applied, (rhs.zeta, rhs.sigma, rhs.tau))))
        u = [band_limited(grid, rng) for _ in range(3)]
        v = [band_limited(grid, rng) for _ in range(3)]
        for apply in (kbk.apply_poisson, kbk.apply_poisson_gamma):
            pu, pv = apply(*u), apply(*v)
            s = sum(f2.inner(a, b) for a, b in zip(u, pv)) + \
                sum(f2.inner(a, b) for a, b in zip(pu, v))
            skew = max(skew, abs(s))
        if i < 5:
            reg = kbk.to_regularized(random_state(grid, rng, 0.5), SCALED)
            a = kbk.rotate90(kbk.evolve(reg, SCALED, cfg).final)
            b = kbk.evolve(kbk.rotate90(reg), SCALED, cfg).final
            rotation = max(rotation, max((x - y).max_abs()
                                         for x, y in zip(a.fields(), b.fields())))
    seconds = time.perf_counter() - t0
    ok = poisson <= 1e-12 and skew <= 1e-10 and rotation <= 1e-12 and seconds < 60
    report(8, ok, f"Poisson identity {poisson:.1e} (tol 1e-12), skew {skew:.1e} "
           f"(tol 1e-10), rotation covariance {rotation:.1e} (tol 1e-12)", seconds)
    assert poisson <= 1e-12
    assert skew <= 1e-10
    assert rotation <= 1e-12
    assert seconds < 60


def _rejects(fn):
    try:
        fn()
    except SpeedWindowError:
        return True
    return False


def test_9_speed_window(report):
    t0 = time.perf_counter()
    grid = Grid2D(256, 8, 200.0, 8.0)
    cases = {
        "elevation": (PhysicalParams(h1=1.5, h2=0.5), 1),
        "depression": (PhysicalParams(h1=0.5, h2=1.5), -1),
    }
    worst = 0.0
    rejections = acceptances = True
    for name, (p, sign) in cases.items():
        coeffs = derive_coefficients(p, convention="unit")
        assert math.copysign(1, coeffs.B) == sign, name
        boundary = p.h1 / p.h if coeffs.B > 0 else -p.h2 / p.h
        lo, hi = cf.soliton_speed_window(coeffs)
        _, zeta_m = cf.kbk_soliton_amplitudes(cf.SolitonSpec(hi, coeffs))
        worst = max(worst, abs(zeta_m - boundary))
        for c in (lo, hi, lo - 0.01, hi + 0.01):
            rejections &= _rejects(lambda: cf.kbk_soliton_profile(cf.SolitonSpec(c, coeffs), 0.0))
        mid = cf.SolitonSpec(0.5 * (lo + hi), coeffs)
        acceptances &= not _rejects(lambda: cf.kbk_soliton_profile(mid, 0.0))
        for q in (0.0, 0.5):
            klo, khi = cf.kp_speed_window(coeffs, q)
            worst = max(worst, abs(cf.kp_amplitude(cf.SolitonSpec(khi, coeffs, q=q)) - boundary))
            for c in (klo, khi, klo - 0.01, khi + 0.01):
                rejections &= _rejects(
                    lambda: cf.kp_line_soliton(cf.SolitonSpec(c, coeffs, q=q), grid))
            kmid = cf.SolitonSpec(0.5 * (klo + khi), coeffs, q=q)
            acceptances &= not _rejects(lambda: cf.kp_line_soliton(kmid, grid))
    # scaled convention: the boundary is reached by alpha * zeta_m
    _, hi = cf.soliton_speed_window(SCALED)
    _, zeta_m = cf.kbk_soliton_amplitudes(cf.SolitonSpec(hi, SCALED))
    worst = max(worst, abs(SCALED.alpha * zeta_m - SCALED.h1_frac))
    seconds = time.perf_counter() - t0
    ok = worst <= 1e-12 and rejections and acceptances and seconds < 1
    report(9, ok, f"zeta_m at c_max off the lid by {worst:.1e} (tol 1e-12); outside "
           f"speeds rejected: {rejections}; interior accepted: {acceptances}", seconds)
    assert worst <= 1e-12
    assert rejections and acceptances
    assert seconds < 1
