"""Evolve a KP line soliton and its embedding in the full model side by side.

    python demos/kp_vs_full.py
"""
import numpy as np

from twolayer import closed_form as cf
from twolayer import kbk, kp
from twolayer.field2d import Grid2D
from twolayer.params import PhysicalParams, derive_coefficients


def main():
    coeffs = derive_coefficients(PhysicalParams(L=20.0, a=0.02, Lprime=200.0))
    lo, hi = cf.kp_speed_window(coeffs)
    c = lo + coeffs.gprime * coeffs.alpha * coeffs.B / (2 * coeffs.c0)
    grid = Grid2D(256, 8, 40.0, 4.0)
    state = kp.KPState(cf.kp_line_soliton(cf.SolitonSpec(c, coeffs), grid))
    full = kp.embed_to_kbk(state, coeffs)
    cfg = kbk.SolverConfig(t_end=0.25, representation="raw", invariant_every=0)
    print(f"alpha = {coeffs.alpha}, window ({lo:.6f}, {hi:.6f}), c = {c:.6f}")
    for n in range(1, 5):
        full = kbk.evolve(full, coeffs, cfg).final
        state = kp.kp_evolve(state, coeffs, cfg).final
        diff = np.max(np.abs(full.zeta.values - state.zeta.values))
        print(f"t = {0.25 * n:.2f}: max |zeta_full - zeta_kp| = {diff:.3e} "
              f"= {diff / coeffs.alpha**2:.3f} alpha^2")


if __name__ == "__main__":
    main()
