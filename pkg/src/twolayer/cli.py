"""Command-line front end: ``twolayer <subcommand> [options]``.

Subcommands: coeffs, soliton, simulate, kp, dispersion, reconstruct.

Exit codes: 0 ok, 2 configuration or parameter error, 3 numerical abort,
4 constraint violation. On failure a JSON object describing the error is
printed to stderr (and written to ``error.json`` when an output directory
is in use).

Environment: ``TWOLAYER_THREADS`` sets the FFT worker count and
``TWOLAYER_OUTPUT_DIR`` overrides the configured output directory (an
explicit ``--output`` still wins).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import closed_form as cf
from . import field2d as f2
from . import io
from . import kbk, kp, reconstruct
from .config import RunConfig, config_to_dict, load_config
from .errors import (ConfigError, ConstraintViolation, DecayError, NumericalAbort,
                     ParameterError, SpeedWindowError)
from .field2d import Field2D, Grid2D
from .params import PhysicalParams, critical_depth_ratio, validate_regime

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CONSTRAINT = 4

_EXIT_CODES = [
    (ConstraintViolation, EXIT_CONSTRAINT),
    (NumericalAbort, EXIT_NUMERICAL),
    (ConfigError, EXIT_CONFIG),
    (ParameterError, EXIT_CONFIG),
    (SpeedWindowError, EXIT_CONFIG),
    (DecayError, EXIT_CONFIG),
    (FileNotFoundError, EXIT_CONFIG),
    (ValueError, EXIT_CONFIG),
]


def exit_code_for(exc):
    for cls, code in _EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return 1


# Configuration plumbing.

_PHYSICAL_FLAGS = ("rho1", "rho2", "h1", "h2", "g", "L", "a", "Lprime")


def _resolve_config(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {k: getattr(args, k) for k in _PHYSICAL_FLAGS
                 if getattr(args, k, None) is not None}
    if overrides:
        try:
            cfg = replace(cfg, physical=replace(cfg.physical, **overrides))
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc
    if getattr(args, "gprime", None) is not None:
        cfg = replace(cfg, gprime=args.gprime)
    if getattr(args, "convention", None) is not None:
        cfg = replace(cfg, convention=args.convention)
    if getattr(args, "representation", None):
        cfg = replace(cfg, solver=replace(cfg.solver, representation=args.representation))
    if getattr(args, "t_end", None) is not None:
        cfg = replace(cfg, solver=replace(cfg.solver, t_end=args.t_end))
    if getattr(args, "initial", None):
        cfg = replace(cfg, initial=replace(cfg.initial, kind=args.initial))
    if getattr(args, "q", None) is not None:
        cfg = replace(cfg, initial=replace(cfg.initial, q=args.q))
    return cfg


def _output_dir(args, cfg):
    if getattr(args, "output", None):
        out = Path(args.output)
    elif os.environ.get("TWOLAYER_OUTPUT_DIR"):
        out = Path(os.environ["TWOLAYER_OUTPUT_DIR"])
    else:
        out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _pair_arg(text, name):
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"--{name} expects two comma separated numbers, got {text!r}")
    if len(parts) != 2:
        raise ConfigError(f"--{name} expects two comma separated numbers, got {text!r}")
    return parts


def _run_json(out, cfg, subcommand, extra=None):
    coeffs = cfg.coefficients()
    payload = {
        "subcommand": subcommand,
        "config": config_to_dict(cfg),
        "coefficients": _coeff_dict(coeffs),
    }
    if extra:
        payload.update(extra)
    io.write_json(out / "run.json", payload)


def _coeff_dict(c):
    return {"A": c.A, "B": c.B, "kappa": c.kappa, "gprime": c.gprime, "c0": c.c0,
            "alpha": c.alpha, "epsilon": c.epsilon, "beta": c.beta}


# Initial data.

def _soliton_speed(initial, window):
    if initial.c is not None:
        return initial.c
    lo, hi = window
    return 0.5 * (lo + hi)


def _gaussian_state(grid, initial):
    X, Y = grid.mesh()
    wx, wy = initial.widths

    def bump(center):
        return np.exp(-(X - center[0]) ** 2 / (2 * wx * wx)
                      - (Y - center[1]) ** 2 / (2 * wy * wy))

    zeta = Field2D(grid, initial.amplitude * bump(initial.center))
    phi = Field2D(grid, initial.shear_amplitude * bump(initial.shear_center))
    return kbk.KBKState(zeta, f2.ddx(phi), f2.ddy(phi))


def kp_grid_for(grid, coeffs):
    """Stretched KP grid matching a KBK grid (ly' = beta ly)."""
    if coeffs.beta > 0:
        return Grid2D(grid.nx, grid.ny, grid.lx, grid.ly * coeffs.beta)
    return grid


def initial_kbk_state(cfg: RunConfig):
    coeffs = cfg.coefficients()
    grid = cfg.grid.build()
    ini = cfg.initial
    if ini.kind == "soliton":
        c = _soliton_speed(ini, cf.soliton_speed_window(coeffs))
        return cf.kbk_soliton_state(cf.SolitonSpec(c, coeffs, ini.theta), grid)
    if ini.kind == "kp_soliton":
        state = initial_kp_state(replace(cfg, grid=replace(
            cfg.grid, ly=kp_grid_for(grid, coeffs).ly)))
        return kp.embed_to_kbk(state, coeffs, grid)
    if ini.kind == "gaussian":
        return _gaussian_state(grid, ini)
    state = io.read_state(ini.path)
    if state.grid != grid:
        raise ConfigError(f"snapshot grid {state.grid} differs from configured {grid}")
    return state


def initial_kp_state(cfg: RunConfig):
    coeffs = cfg.coefficients()
    grid = cfg.grid.build()
    ini = cfg.initial
    if ini.kind == "kp_soliton":
        c = _soliton_speed(ini, cf.kp_speed_window(coeffs, ini.q))
        zeta = cf.kp_line_soliton(cf.SolitonSpec(c, coeffs, q=ini.q), grid)
    elif ini.kind == "gaussian":
        zeta = _gaussian_state(grid, ini).zeta
    elif ini.kind == "file":
        zeta = f2.read_snapshot(Path(ini.path) / "zeta.sw2d")
    else:
        raise ConfigError("kp runs accept initial kinds kp_soliton, gaussian or file")
    state = kp.project_kx0(kp.KPState(zeta)) if ini.kind != "kp_soliton" else kp.KPState(zeta)
    return state


# Subcommands.

def cmd_coeffs(args):
    cfg = _resolve_config(args)
    c = cfg.coefficients()
    p = cfg.physical
    regime = validate_regime(c)
    data = _coeff_dict(c)
    data["critical_ratio"] = critical_depth_ratio(p.rho1, p.rho2)
    data["alpha_over_eps2"] = regime.alpha_over_eps2
    data["alpha_flag"] = regime.alpha_flag
    data["beta_over_eps"] = regime.beta_over_eps
    data["beta_flag"] = regime.beta_flag
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        width = max(len(k) for k in data)
        for key, value in data.items():
            text = format(value, ".17g") if isinstance(value, float) else str(value)
            print(f"{key:<{width}}  {text}")
    return EXIT_OK


def cmd_soliton(args):
    cfg = _resolve_config(args)
    coeffs = cfg.coefficients()
    out = _output_dir(args, cfg)
    n = args.n
    if args.kind == "kbk":
        window = cf.soliton_speed_window(coeffs)
        c = args.c if args.c is not None else 0.5 * sum(window)
        spec = cf.SolitonSpec(c, coeffs, args.theta)
        half = cf.soliton_box_halfwidth(spec)
        x = -half + 2 * half / n * np.arange(n)
        zeta, gamma = cf.kbk_soliton_profile(spec, x)
        gamma_m, zeta_m = cf.kbk_soliton_amplitudes(spec)
        summary = {"kind": "kbk", "c": c, "window": list(window), "gamma_m": gamma_m,
                   "zeta_m": zeta_m, "width_rate": cf.soliton_width_rate(spec),
                   "half_width": half, "newton_residual": cf.newton_residual(spec, n)}
        columns, rows = ["x", "zeta", "gamma"], zip(x, zeta, gamma)
    else:
        window = cf.kp_speed_window(coeffs, args.q)
        c = args.c if args.c is not None else 0.5 * sum(window)
        spec = cf.SolitonSpec(c, coeffs, q=args.q)
        zeta_m = cf.kp_amplitude(spec)
        k = cf.kp_wavenumber(spec)
        half = cf.DEFAULT_HALF_WIDTH / (2 * k)
        grid = Grid2D(n, 8, 2 * half, 1.0)
        zeta = cf.kp_line_soliton(spec, grid).values[grid.ny // 2]
        x = grid.x
        summary = {"kind": "kp", "c": c, "q": args.q, "window": list(window),
                   "zeta_m": zeta_m, "wavenumber": k, "half_width": half}
        columns, rows = ["x", "zeta"], zip(x, zeta)
    _run_json(out, cfg, "soliton", {"summary": summary})
    io.write_csv(out / "soliton.csv", columns, rows)
    io.write_json(out / "summary.json", summary)
    print(json.dumps(io._jsonable(summary), sort_keys=True))
    return EXIT_OK


def _simulate(cfg, out):
    coeffs = cfg.coefficients()
    state = initial_kbk_state(cfg)
    grid = state.grid
    rep = cfg.solver.representation
    bound = kbk.stability_bound(grid, coeffs, rep, state)
    _run_json(out, cfg, "simulate", {"stability_bound": bound})
    formats = cfg.output.formats
    snap_dir = out / "snapshots"

    def callback(st, n):
        if "sw2d" in formats and cfg.solver.snapshot_every and \
                n % cfg.solver.snapshot_every == 0:
            io.write_state(snap_dir, st, prefix=f"step_{n:07d}_")

    traj = kbk.evolve(state, coeffs, cfg.solver,
                      callback=callback if cfg.solver.snapshot_every else None)
    if "csv" in formats:
        io.write_csv(out / "invariants.csv", kbk.INVARIANT_COLUMNS,
                     (r.row() for r in traj.invariants))
    if "sw2d" in formats:
        io.write_state(out, kbk.as_raw(traj.final, coeffs), prefix="final_")
    summary = {"steps": traj.steps, "dt": traj.dt, "t_final": traj.final.time,
               "representation": traj.final.representation}
    if traj.invariants:
        first, last = traj.invariants[0], traj.invariants[-1]
        summary["drift"] = {name: b - a for name, a, b in
                            zip(kbk.INVARIANT_COLUMNS[1:], first.row()[1:],
                                last.row()[1:])}
        summary["lrot_reliable"] = first.lrot_reliable
    if "json" in formats:
        io.write_json(out / "summary.json", summary)
    return summary


def _simulate_job(path, base):
    """Worker for ``--sweep``: returns (config path, exit code, message)."""
    try:
        cfg = load_config(path)
        out = Path(base) / Path(path).stem if base else Path(cfg.output.directory)
        out.mkdir(parents=True, exist_ok=True)
        _simulate(cfg, out)
        return str(path), EXIT_OK, ""
    except Exception as exc:  # reported per config
        return str(path), exit_code_for(exc), f"{type(exc).__name__}: {exc}"


def cmd_simulate(args):
    if args.sweep:
        base = args.output or os.environ.get("TWOLAYER_OUTPUT_DIR")
        workers = args.workers or os.cpu_count() or 1
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_simulate_job, args.sweep,
                                    [base] * len(args.sweep)))
        worst = EXIT_OK
        for path, code, message in results:
            print(json.dumps({"config": path, "exit_code": code, "message": message}))
            worst = max(worst, code)
        return worst
    cfg = _resolve_config(args)
    out = _output_dir(args, cfg)
    args._out = out
    summary = _simulate(cfg, out)
    print(json.dumps(io._jsonable(summary), sort_keys=True))
    return EXIT_OK


def cmd_kp(args):
    cfg = _resolve_config(args)
    if getattr(args, "initial", None) is None and cfg.initial.kind == "gaussian" \
            and not args.config:
        cfg = replace(cfg, initial=replace(cfg.initial, kind="kp_soliton"))
    coeffs = cfg.coefficients()
    out = _output_dir(args, cfg)
    args._out = out
    state = initial_kp_state(cfg)
    _run_json(out, cfg, "kp", {"stability_bound": kp.kp_stability_bound(
        state.grid, coeffs, state)})
    traj = kp.kp_evolve(state, coeffs, cfg.solver)
    io.write_csv(out / "kp_series.csv", kp.KP_COLUMNS, (r.row() for r in traj.series))
    if "sw2d" in cfg.output.formats:
        f2.write_snapshot(out / "kp_final_zeta.sw2d", traj.final.zeta)
    summary = {"steps": traj.steps, "dt": traj.dt, "t_final": traj.final.time}
    if args.embed_check:
        summary["embed_check"] = _embed_check(state, coeffs, cfg, out, args.segments)
    io.write_json(out / "summary.json", summary)
    print(json.dumps(io._jsonable(summary), sort_keys=True))
    return EXIT_OK


def _embed_check(state, coeffs, cfg, out, segments):
    """Evolve a KP state and its KBK lift side by side; record L-inf of zeta."""
    lifted = kp.embed_to_kbk(state, coeffs)
    rep = cfg.solver.representation
    if rep == "regularized":
        lifted = kbk.to_regularized(lifted, coeffs)
    rows = [[0.0, float(np.max(np.abs(lifted.zeta.values - state.zeta.values)))]]
    seg = cfg.solver.t_end / segments
    a, b = lifted, state
    for _ in range(segments):
        sub = replace(cfg.solver, t_end=seg, invariant_every=0, snapshot_every=0)
        a = kbk.evolve(a, coeffs, replace(sub, representation=rep)).final
        b = kp.kp_evolve(b, coeffs, sub).final
        rows.append([b.time, float(np.max(np.abs(a.zeta.values - b.zeta.values)))])
    io.write_csv(out / "embed_check.csv", ["t", "linf_zeta"], rows)
    worst = max(r[1] for r in rows)
    return {"max_linf": worst,
            "C": worst / coeffs.alpha**2 if coeffs.alpha > 0 else math.inf}


def cmd_dispersion(args):
    cfg = _resolve_config(args)
    coeffs = cfg.coefficients()
    k = _pair_arg(args.k, "k")
    gamma0 = _pair_arg(args.gamma0, "gamma0")
    wp, wm, ill = kbk.dispersion(k, gamma0, coeffs, regularized=args.regularized)
    data = {"k": k, "gamma0": gamma0, "regularized": args.regularized,
            "omega_plus": [wp.real, wp.imag], "omega_minus": [wm.real, wm.imag],
            "illposed": ill, "cutoff_k2": kbk.illposed_cutoff_k2(coeffs)}
    if args.json:
        print(json.dumps(io._jsonable(data), sort_keys=True))
    else:
        def fmt(w):
            return format(w.real, ".17g") if w.imag == 0 else f"{w.real:.17g}{w.imag:+.17g}j"
        print(f"omega_plus={fmt(wp)} omega_minus={fmt(wm)} "
              f"illposed={str(ill).lower()}")
    return EXIT_OK


def cmd_reconstruct(args):
    cfg = _resolve_config(args)
    coeffs = cfg.coefficients()
    out = _output_dir(args, cfg)
    args._out = out
    rep = args.input_representation
    state = io.read_state(args.input, prefix=args.prefix, representation=rep)
    _run_json(out, cfg, "reconstruct", {"input": str(args.input), "order": args.order})
    raw = kbk.as_raw(state, coeffs)
    vel = reconstruct.layer_averaged(
        reconstruct.interface_velocities(raw, coeffs, args.order), coeffs)
    pressure = reconstruct.interfacial_pressure(raw, coeffs)
    chi, div_norm = reconstruct.vorticity_sheet_check(raw)
    for name in ("u1t", "v1t", "u2t", "v2t", "ubar1", "vbar1", "ubar2", "vbar2"):
        f2.write_snapshot(out / f"{name}.sw2d", getattr(vel, name))
    f2.write_snapshot(out / "pressure.sw2d", pressure.field)
    f2.write_snapshot(out / "chi.sw2d", chi)
    pmin, pmax = reconstruct.pressure_extrema(pressure.field)
    summary = {
        "order": args.order,
        "div_norm": div_norm,
        "curl_norm": raw.curl_norm(),
        "mass_constraint": reconstruct.mass_constraint_residual(vel, coeffs),
        "sheet_residual": reconstruct.sheet_residual(vel, raw, coeffs),
        "pressure_min": pmin,
        "pressure_max": pmax,
        "stationary": pressure.stationary,
        "stationary_residual": pressure.residual,
    }
    io.write_json(out / "summary.json", summary)
    print(json.dumps(io._jsonable(summary), sort_keys=True))
    return EXIT_OK


def _add_physical(p):
    p.add_argument("--config", help="TOML run configuration")
    for name in _PHYSICAL_FLAGS:
        p.add_argument(f"--{name}", type=float, default=None)
    p.add_argument("--gprime", type=float, default=None)
    p.add_argument("--convention", choices=("scaled", "unit"), default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="twolayer", description="Two-layer internal wave models")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="model coefficients and regime flags")
    _add_physical(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("soliton", help="closed-form solitary wave profile")
    _add_physical(p)
    p.add_argument("--kind", choices=("kbk", "kp"), default="kbk")
    p.add_argument("--c", type=float, default=None, help="speed (default: window midpoint)")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--output")
    p.set_defaults(func=cmd_soliton)

    p = sub.add_parser("simulate", help="evolve the two-dimensional system")
    _add_physical(p)
    p.add_argument("--initial", choices=("soliton", "kp_soliton", "gaussian", "file"))
    p.add_argument("--representation", choices=kbk.REPRESENTATIONS)
    p.add_argument("--t-end", dest="t_end", type=float, default=None)
    p.add_argument("--output")
    p.add_argument("--sweep", nargs="+", metavar="CONFIG",
                   help="run several configs on a worker pool")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("kp", help="evolve the unidirectional KP model")
    _add_physical(p)
    p.add_argument("--initial", choices=("kp_soliton", "gaussian", "file"))
    p.add_argument("--representation", choices=kbk.REPRESENTATIONS,
                   help="representation of the KBK run used by --embed-check")
    p.add_argument("--t-end", dest="t_end", type=float, default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--embed-check", action="store_true",
                   help="compare against the lifted two-dimensional run")
    p.add_argument("--segments", type=int, default=10)
    p.add_argument("--output")
    p.set_defaults(func=cmd_kp)

    p = sub.add_parser("dispersion", help="linear frequencies")
    _add_physical(p)
    p.add_argument("--k", default="1,0")
    p.add_argument("--gamma0", default="0,0")
    p.add_argument("--regularized", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("reconstruct", help="layer velocities and pressure from a state")
    _add_physical(p)
    p.add_argument("--input", required=True, help="directory with the state snapshots")
    p.add_argument("--prefix", default="final_")
    p.add_argument("--input-representation", choices=kbk.REPRESENTATIONS, default="raw")
    p.add_argument("--order", choices=reconstruct.ORDERS, default="leading")
    p.add_argument("--output")
    p.set_defaults(func=cmd_reconstruct)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        code = exit_code_for(exc)
        if code == 1:
            raise
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code,
               "command": args.command}
        for attr in ("line", "step", "edge_magnitude"):
            if getattr(exc, attr, None) is not None:
                err[attr] = getattr(exc, attr)
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        out = getattr(args, "_out", None)
        if out is not None:
            io.write_json(Path(out) / "error.json", err)
        return code


if __name__ == "__main__":
    sys.exit(main())
