"""Run configuration: a TOML document with five sections.

    [physical]  rho1, rho2, h1, h2, g, L, a, Lprime, gprime, convention
    [grid]      nx, ny, lx, ly
    [solver]    dt, t_end, dealias, representation, snapshot_every,
                invariant_every, growth_guard
    [initial]   kind = "soliton" | "kp_soliton" | "gaussian" | "file", plus
                the keys of that kind
    [output]    directory, formats

Unknown sections and keys are rejected. Every section is optional and
missing keys take the defaults below.
"""
from __future__ import annotations

import dataclasses
import re
import sys
from dataclasses import dataclass, field
from typing import Optional

import tomli_w

from .errors import ConfigError, ParameterError
from .field2d import Grid2D
from .kbk import SolverConfig
from .params import PhysicalParams, derive_coefficients

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

INITIAL_KINDS = ("soliton", "kp_soliton", "gaussian", "file")
OUTPUT_FORMATS = ("csv", "sw2d", "json")


@dataclass(frozen=True)
class GridSpec:
    nx: int = 256
    ny: int = 256
    lx: float = 40.0
    ly: float = 40.0

    def build(self):
        return Grid2D(self.nx, self.ny, self.lx, self.ly)


@dataclass(frozen=True)
class InitialCondition:
    """Tagged initial data. Unused fields keep their defaults.

    ``c = None`` selects the midpoint of the admissible speed window.
    A gaussian sets zeta to ``amplitude`` times a Gaussian of ``widths``
    at ``center`` and gamma to the gradient of a Gaussian potential of
    strength ``shear_amplitude`` at ``shear_center``.
    """

    kind: str = "gaussian"
    c: Optional[float] = None
    theta: float = 0.0
    q: float = 0.0
    amplitude: float = 1.0
    widths: tuple = (2.5, 2.5)
    center: tuple = (0.0, 0.0)
    shear_amplitude: float = 0.0
    shear_center: tuple = (0.0, 0.0)
    path: str = ""


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    formats: tuple = ("csv", "sw2d", "json")


@dataclass(frozen=True)
class RunConfig:
    physical: PhysicalParams = field(default_factory=PhysicalParams)
    gprime: float = 1.0
    convention: str = "scaled"
    grid: GridSpec = field(default_factory=GridSpec)
    solver: SolverConfig = field(default_factory=SolverConfig)
    initial: InitialCondition = field(default_factory=InitialCondition)
    output: OutputSpec = field(default_factory=OutputSpec)

    def coefficients(self):
        return derive_coefficients(self.physical, self.gprime, self.convention)


# key -> accepted python types; floats also accept ints.
_NUM = (int, float)
_SCHEMA = {
    "physical": {"rho1": _NUM, "rho2": _NUM, "h1": _NUM, "h2": _NUM, "g": _NUM,
                 "L": _NUM, "a": _NUM, "Lprime": _NUM, "gprime": _NUM,
                 "convention": (str,)},
    "grid": {"nx": (int,), "ny": (int,), "lx": _NUM, "ly": _NUM},
    "solver": {"dt": _NUM, "t_end": _NUM, "dealias": (bool,),
               "representation": (str,), "snapshot_every": (int,),
               "invariant_every": (int,), "growth_guard": _NUM},
    "initial": {"kind": (str,), "c": _NUM, "theta": _NUM, "q": _NUM,
                "amplitude": _NUM, "widths": (list,), "center": (list,),
                "shear_amplitude": _NUM, "shear_center": (list,), "path": (str,)},
    "output": {"directory": (str,), "formats": (list,)},
}


def _line_index(text):
    """Map (section, key) and section headers to 1-based line numbers."""
    where = {}
    section = None
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"^\[\s*([A-Za-z0-9_.-]+)\s*\]", s)
        if m:
            section = m.group(1)
            where.setdefault((section, None), n)
            continue
        m = re.match(r"^([A-Za-z0-9_\"'-]+)\s*=", s)
        if m:
            where.setdefault((section, m.group(1).strip("\"'")), n)
    return where


def _is_type(value, types):
    if isinstance(value, bool) and bool not in types:
        return False
    return isinstance(value, types)


def _pair(value, name, line):
    if len(value) != 2 or not all(_is_type(v, _NUM) for v in value):
        raise ConfigError(f"{name} must be a list of two numbers", line)
    return (float(value[0]), float(value[1]))


def parse_config(text):
    """Parse TOML text into a fully resolved :class:`RunConfig`."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"malformed TOML: {exc}", int(m.group(1)) if m else None)
    lines = _line_index(text)
    for section, body in doc.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]", lines.get((section, None)))
        if not isinstance(body, dict):
            raise ConfigError(f"{section} must be a table", lines.get((section, None)))
        for key, value in body.items():
            line = lines.get((section, key))
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}", line)
            if not _is_type(value, _SCHEMA[section][key]):
                expected = "/".join(t.__name__ for t in _SCHEMA[section][key])
                raise ConfigError(
                    f"{section}.{key} must be {expected}, got {type(value).__name__}",
                    line)

    def sect(name):
        return doc.get(name, {})

    def line_of(name, key=None):
        return lines.get((name, key), lines.get((name, None)))

    phys = dict(sect("physical"))
    gprime = float(phys.pop("gprime", 1.0))
    convention = phys.pop("convention", "scaled")
    if convention not in ("scaled", "unit"):
        raise ConfigError(f"physical.convention must be 'scaled' or 'unit', got "
                          f"{convention!r}", line_of("physical", "convention"))
    try:
        physical = PhysicalParams(**{k: float(v) for k, v in phys.items()})
        derive_coefficients(physical, gprime, convention)
    except ParameterError as exc:
        raise ConfigError(str(exc), line_of("physical")) from exc

    try:
        grid = GridSpec(**{k: (int(v) if k in ("nx", "ny") else float(v))
                           for k, v in sect("grid").items()})
        grid.build()
    except ValueError as exc:
        raise ConfigError(str(exc), line_of("grid")) from exc

    solver_kw = dict(sect("solver"))
    for key in ("dt", "t_end", "growth_guard"):
        if key in solver_kw:
            solver_kw[key] = float(solver_kw[key])
    try:
        solver = SolverConfig(**solver_kw)
    except ValueError as exc:
        raise ConfigError(str(exc), line_of("solver")) from exc

    init_kw = dict(sect("initial"))
    kind = init_kw.get("kind", "gaussian")
    if kind not in INITIAL_KINDS:
        raise ConfigError(f"initial.kind must be one of {INITIAL_KINDS}, got {kind!r}",
                          line_of("initial", "kind"))
    for key in ("widths", "center", "shear_center"):
        if key in init_kw:
            init_kw[key] = _pair(init_kw[key], f"initial.{key}", line_of("initial", key))
    for key in ("c", "theta", "q", "amplitude", "shear_amplitude"):
        if key in init_kw:
            init_kw[key] = float(init_kw[key])
    if kind == "file" and not init_kw.get("path"):
        raise ConfigError("initial.kind = 'file' needs initial.path", line_of("initial"))
    initial = InitialCondition(**init_kw)

    out_kw = dict(sect("output"))
    if "formats" in out_kw:
        formats = out_kw["formats"]
        bad = [f for f in formats if f not in OUTPUT_FORMATS]
        if bad:
            raise ConfigError(f"unknown output formats {bad}; choose from "
                              f"{OUTPUT_FORMATS}", line_of("output", "formats"))
        out_kw["formats"] = tuple(formats)
    output = OutputSpec(**out_kw)
    return RunConfig(physical, gprime, convention, grid, solver, initial, output)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_to_dict(cfg: RunConfig):
    """Plain nested dict of the resolved config (None values omitted)."""
    def clean(d):
        out = {}
        for k, v in d.items():
            if v is None:
                continue
            out[k] = list(v) if isinstance(v, tuple) else v
        return out

    physical = clean(dataclasses.asdict(cfg.physical))
    physical["gprime"] = cfg.gprime
    physical["convention"] = cfg.convention
    return {
        "physical": physical,
        "grid": clean(dataclasses.asdict(cfg.grid)),
        "solver": clean(dataclasses.asdict(cfg.solver)),
        "initial": clean(dataclasses.asdict(cfg.initial)),
        "output": clean(dataclasses.asdict(cfg.output)),
    }


def serialize_config(cfg: RunConfig):
    return tomli_w.dumps(config_to_dict(cfg))
