"""Carry a plane soliton once around the periodic box and compare.

    python demos/soliton_transit.py
"""
import numpy as np

from twolayer import closed_form as cf
from twolayer import kbk
from twolayer.params import PhysicalParams, derive_coefficients


def main():
    coeffs = derive_coefficients(PhysicalParams(rho1=1.0, rho2=1.005), convention="unit")
    lo, hi = cf.soliton_speed_window(coeffs)
    spec = cf.SolitonSpec(0.5 * (lo + hi), coeffs)
    grid = cf.soliton_grid(spec)
    state = cf.kbk_soliton_state(spec, grid)
    bound = kbk.stability_bound(grid, coeffs, "raw", state)
    gamma_m, zeta_m = cf.kbk_soliton_amplitudes(spec)
    print(f"c = {spec.c:.6f} in ({lo:.6f}, {hi:.6f}), zeta_m = {zeta_m:.4f}, "
          f"gamma_m = {gamma_m:.4f}, box = {grid.lx:.1f}")
    for frac in (0.5, 0.25):
        cfg = kbk.SolverConfig(t_end=grid.lx / spec.c, dt=frac * bound,
                               representation="raw", invariant_every=0)
        traj = kbk.evolve(state, coeffs, cfg)
        err = max(np.max(np.abs(a.values - b.values))
                  for a, b in zip(traj.final.fields(), state.fields()))
        print(f"dt = {traj.dt:.4e}: {traj.steps} steps, max error after one transit {err:.3e}")


if __name__ == "__main__":
    main()
