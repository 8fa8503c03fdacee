"""Command-line front end: scenario files, parameter sweeps and tabular output.

A scenario is an INI file whose physical values carry units (``radius = 1.3 um``).
Each subcommand evaluates one row per sweep grid point and writes a CSV table
with ``#`` metadata lines; ``--format json`` also writes a JSON mirror.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ComputeError, ConfigInvalid, PolaromechError, SqueezeDiverges, UnknownMaterial, UnknownSweepVariable, UnstablePoint
from .units import UNITS, parse_quantity

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 2, 3


# ---------------------------------------------------------------- schema


@dataclass(frozen=True)
class Field:
    kind: str  # qty | int | str | list | qtylist
    dim: str = "1"
    default: object = None
    choices: tuple[str, ...] = ()


SCHEMA: dict[str, dict[str, Field]] = {
    "scenario": {
        "commands": Field("list"),
        "description": Field("str", default=""),
    },
    "materials": {
        "path": Field("str"),
        "host": Field("str", default="GaAs"),
    },
    "geometry": {
        "kind": Field("str", choices=("disk", "ring", "pillar")),
        "radius": Field("qty", "m"),
        "inner_radius": Field("qty", "m", 0.0),
        "thickness": Field("qty", "m", 200e-9),
        "wavelength": Field("qty", "m", 850e-9),
        "qw_positions": Field("qtylist", "m", (0.0,)),
        "n_high": Field("qty", "1", 3.5),
        "n_low": Field("qty", "1", 2.9),
        "n_pairs": Field("int", default=25),
        "sound_speed": Field("qty", "m/s", 5270.0),
        "cutoff": Field("qty", "1/s", 2 * math.pi * 19.5e9),
    },
    "qw": {
        "thickness": Field("qty", "m", 8e-9),
        "indium_fraction": Field("qty", "1", 0.05),
    },
    "modes": {
        "mech_count": Field("int", default=3),
        "p_max": Field("int", default=3),
    },
    "polariton": {
        "exciton_fraction": Field("qty", "1"),
        "G_cm": Field("qty", "1/(s*m)"),
        "kappa_c": Field("qty", "1/s"),
        "kappa_x": Field("qty", "1/s"),
        "gamma": Field("qty", "1/s"),
    },
    "drive": {
        "detuning": Field("qty", "1/s"),
        "n_in_per_kappa": Field("qty", "1"),
        "n": Field("qty", "1"),
        "kappa_r": Field("qty", "1/s"),
        "kappa": Field("qty", "1/s"),
        "omega": Field("qty", "1/s"),
        "gamma": Field("qty", "1/s"),
        "g": Field("qty", "1/s"),
        "chi": Field("qty", "1/s"),
        "temperature": Field("qty", "K", 4.0),
    },
    "cool": {
        "method": Field("str", default="residues", choices=("residues", "residues-exact", "quadrature", "exact-qle")),
    },
    "damping": {
        "route": Field("str", default="qle", choices=("squeezed", "qle", "eigen")),
    },
    "spectrum": {
        "frequency": Field("qty", "1/s"),
        "route": Field("str", default="exact", choices=("exact", "squeezed")),
    },
    "output": {
        "path": Field("str", default="."),
        "format": Field("str", default="csv", choices=("csv", "json")),
    },
}

SWEEP_SECTIONS = ("sweep", "sweep2")
SWEEP_KEYS = {"variable", "start", "stop", "steps", "spacing", "values", "commands"}


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    current = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return i
        elif key is not None and current == section and line.partition("=")[0].strip() == key:
            return i
    return None


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class Sweep:
    variable: str
    unit: str
    grid: tuple[float, ...]
    commands: tuple[str, ...] = ()  # empty: applies to every command

    def applies(self, command: str) -> bool:
        return not self.commands or command in self.commands


@dataclass
class ScenarioConfig:
    name: str
    text: str
    values: dict[str, object]
    sweeps: tuple[Sweep, ...]
    base_dir: Path
    sha256: str = field(init=False)

    def __post_init__(self):
        self.sha256 = hashlib.sha256(self.text.encode()).hexdigest()

    @property
    def commands(self) -> tuple[str, ...]:
        return tuple(self.values.get("scenario.commands") or ())


def _split_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _unit_of(text: str) -> str:
    parts = text.strip().split(None, 1)
    return parts[1].strip() if len(parts) == 2 else ""


def _parse_value(fdef: Field, raw: str, key: str, line: int | None):
    try:
        if fdef.kind == "qty":
            return parse_quantity(raw, fdef.dim)
        if fdef.kind == "int":
            value = float(raw)
            if value != int(value):
                raise ValueError(f"{raw!r} is not an integer")
            return int(value)
        if fdef.kind == "qtylist":
            return tuple(parse_quantity(t, fdef.dim) for t in _split_list(raw))
        if fdef.kind == "list":
            return tuple(_split_list(raw))
        if fdef.choices and raw not in fdef.choices:
            raise ValueError(f"{raw!r} not in {', '.join(fdef.choices)}")
        return raw
    except ValueError as exc:
        raise ConfigInvalid(str(exc), field=key, line=line) from None


def _parse_sweep(parser, section: str, text: str) -> Sweep:
    body = parser[section]
    for key in body:
        if key not in SWEEP_KEYS:
            raise ConfigInvalid(f"unknown sweep key in [{section}]", field=f"{section}.{key}", line=_line_of(text, section, key))
    if "variable" not in body:
        raise ConfigInvalid("sweep needs a variable", field=f"{section}.variable", line=_line_of(text, section))
    var = body["variable"].strip()
    sec, _, key = var.partition(".")
    fdef = SCHEMA.get(sec, {}).get(key)
    if fdef is None or fdef.kind != "qty":
        raise UnknownSweepVariable(f"{var!r} is not a numeric config value", field=f"{section}.variable", line=_line_of(text, section, "variable"))

    def qty(k, raw):
        try:
            return parse_quantity(raw, fdef.dim)
        except ValueError as exc:
            raise ConfigInvalid(str(exc), field=f"{section}.{k}", line=_line_of(text, section, k)) from None

    only = tuple(_split_list(body.get("commands", "")))
    if "values" in body:
        items = _split_list(body["values"])
        if not items:
            raise ConfigInvalid("empty value list", field=f"{section}.values", line=_line_of(text, section, "values"))
        return Sweep(var, _unit_of(items[0]), tuple(qty("values", t) for t in items), only)
    for k in ("start", "stop"):
        if k not in body:
            raise ConfigInvalid(f"sweep needs {k} (or values)", field=f"{section}.{k}", line=_line_of(text, section))
    start, stop = qty("start", body["start"]), qty("stop", body["stop"])
    steps = _parse_value(Field("int"), body.get("steps", "2"), f"{section}.steps", _line_of(text, section, "steps"))
    spacing = body.get("spacing", "linear").strip()
    if steps < 1:
        raise ConfigInvalid("steps must be >= 1", field=f"{section}.steps", line=_line_of(text, section, "steps"))
    if start == stop:
        steps = 1
    if spacing == "linear":
        grid = np.linspace(start, stop, steps)
    elif spacing == "log":
        if start * stop <= 0:
            raise ConfigInvalid("log spacing needs start and stop of equal sign", field=f"{section}.spacing", line=_line_of(text, section, "spacing"))
        grid = np.geomspace(start, stop, steps)
    else:
        raise ConfigInvalid(f"spacing {spacing!r} not in linear, log", field=f"{section}.spacing", line=_line_of(text, section, "spacing"))
    if steps == 1:
        grid = np.array([start])
    return Sweep(var, _unit_of(body["start"]), tuple(float(x) for x in grid), only)


def parse_config(text: str, name: str = "<string>", base_dir: Path | str = ".") -> ScenarioConfig:
    """Validate a scenario against the schema; nothing is computed here."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=name)
    except configparser.Error as exc:
        raise ConfigInvalid(str(exc).replace("\n", " "), line=getattr(exc, "lineno", None)) from None
    values: dict[str, object] = {}
    for sec, fields in SCHEMA.items():
        for key, fdef in fields.items():
            if fdef.default is not None:
                values[f"{sec}.{key}"] = fdef.default
    for sec in parser.sections():
        if sec in SWEEP_SECTIONS:
            continue
        if sec not in SCHEMA:
            raise ConfigInvalid(f"unknown section [{sec}]", line=_line_of(text, sec))
        for key, raw in parser[sec].items():
            line = _line_of(text, sec, key)
            fdef = SCHEMA[sec].get(key)
            if fdef is None:
                raise ConfigInvalid("unknown key", field=f"{sec}.{key}", line=line)
            values[f"{sec}.{key}"] = _parse_value(fdef, raw.strip(), f"{sec}.{key}", line)
    sweeps = tuple(_parse_sweep(parser, s, text) for s in SWEEP_SECTIONS if parser.has_section(s))
    if len({s.variable for s in sweeps}) < len(sweeps):
        raise ConfigInvalid("both sweeps use the same variable", field="sweep2.variable", line=_line_of(text, "sweep2", "variable"))
    for cmd in values.get("scenario.commands") or ():
        if cmd not in COMMANDS:
            raise ConfigInvalid(f"unknown command {cmd!r}", field="scenario.commands", line=_line_of(text, "scenario", "commands"))
    for sec, sw in zip((s for s in SWEEP_SECTIONS if parser.has_section(s)), sweeps):
        for cmd in sw.commands:
            if cmd not in COMMANDS:
                raise ConfigInvalid(f"unknown command {cmd!r}", field=f"{sec}.commands", line=_line_of(text, sec, "commands"))
    return ScenarioConfig(name, text, values, sweeps, Path(base_dir))


def bundled_configs() -> list[str]:
    root = resources.files("polaromech.configs")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_config(path: str | Path) -> ScenarioConfig:
    """Read a scenario file; a bare name such as ``fig2_pillar`` selects a bundled config."""
    p = Path(path)
    if p.is_file():
        return parse_config(p.read_text(encoding="utf-8"), p.name, p.parent)
    name = p.name if p.name.endswith(".cfg") else p.name + ".cfg"
    res = resources.files("polaromech.configs").joinpath(name)
    if str(path) == p.name and res.is_file():
        return parse_config(res.read_text(encoding="utf-8"), name, ".")
    raise ConfigInvalid(f"cannot read config {str(path)!r}; bundled: {', '.join(bundled_configs())}")


# ---------------------------------------------------------------- commands


class Params:
    """Resolved values for one grid point; a missing required key is a config error."""

    def __init__(self, values: dict[str, object], table):
        self.values = values
        self.table = table

    def __getitem__(self, key: str):
        if self.values.get(key) is None:
            raise ConfigInvalid("required value missing", field=key)
        return self.values[key]

    def material(self, name: str):
        from .materials import lookup_material

        try:
            return lookup_material(name, self.table)
        except UnknownMaterial as exc:
            raise ConfigInvalid(f"unknown material {exc}", field="materials.host") from None


def _col(name: str, value, unit: str = "1"):
    scale = UNITS[unit][0] if unit in UNITS else 1.0
    if isinstance(value, (bool, np.bool_)):
        return name, unit, bool(value)
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return name, unit, int(value)
    if isinstance(value, str):
        return name, unit, value
    return name, unit, float(value) / scale


def _planar_geometry(p: Params):
    from .planar_modes import PlanarGeometry

    inner = p["geometry.inner_radius"] if p["geometry.kind"] == "ring" else 0.0
    return PlanarGeometry(p["geometry.radius"], p["geometry.thickness"], p.material(p["materials.host"]), inner, p["geometry.qw_positions"], p["geometry.wavelength"])


def _pillar_geometry(p: Params, radius: float | None = None):
    from .pillar_modes import PillarGeometry, dbr_dispersion

    dbr = dbr_dispersion(p["geometry.n_high"], p["geometry.n_low"], p["geometry.wavelength"])
    return PillarGeometry(
        p["geometry.radius"] if radius is None else radius,
        dbr,
        n_pairs=p["geometry.n_pairs"],
        qw_offsets=tuple(p["geometry.qw_positions"]),
        sound_speed=p["geometry.sound_speed"],
        cutoff_omega=p["geometry.cutoff"],
        high=p.material("GaAs"),
        low=p.material("AlAs"),
    )


def _exciton(p: Params):
    from .exciton import QWSpec, self_consistent_exciton

    qw = QWSpec(p["qw.thickness"], p["qw.indium_fraction"], p.material(p["materials.host"]), table=p.table)
    return self_consistent_exciton(qw)


def cmd_exciton(p: Params):
    ex = _exciton(p)
    return [
        _col("binding_energy", ex.binding_energy, "meV"),
        _col("bohr_radius", ex.bohr_radius, "nm"),
        _col("transition_energy", ex.transition_energy, "eV"),
        _col("radiative_halfwidth", ex.radiative_halfwidth, "ueV"),
        _col("iterations", ex.iterations),
    ]


def cmd_modes(p: Params):
    from .pillar_modes import pillar_mech_mode, vertical_envelope
    from .planar_modes import mech_ring, rbm_disk, wgm_mode
    from .couplings import nearest_wgm_orders

    kind = p["geometry.kind"]
    if kind == "pillar":
        g = _pillar_geometry(p)
        m = pillar_mech_mode(g)
        return [
            _col("mech_omega", m.omega, "GHz"),
            _col("mech_mass", m.mass, "pg"),
            _col("x_zpf", m.x_zpf, "fm"),
            _col("dbr_effective_index", g.dbr.effective_index),
            _col("penetration_length", g.dbr.penetration_length, "nm"),
            _col("optical_omega", vertical_envelope(g).omega, "THz"),
        ]
    g = _planar_geometry(p)
    cols = []
    for n in range(1, p["modes.mech_count"] + 1):
        m = rbm_disk(g, n) if kind == "disk" else mech_ring(g, n)
        cols += [_col(f"mech{n}_omega", m.omega, "GHz"), _col(f"mech{n}_KR", m.K * g.outer_radius), _col(f"mech{n}_x_zpf", m.x_zpf, "fm")]
    for q, l in nearest_wgm_orders(g, p["modes.p_max"]):
        cols += [_col(f"wgm_p{q}_l", l), _col(f"wgm_p{q}_omega", wgm_mode(g, q, l).omega, "THz")]
    return cols


def cmd_couplings(p: Params):
    from .couplings import best_planar_pair, disk_pair, gcx_pillar, gcx_planar, gxm_pillar, rabi_splitting
    from .pillar_modes import pillar_mech_mode
    from .planar_modes import mech_ring

    ex = _exciton(p)
    if p["geometry.kind"] == "pillar":
        g = _pillar_geometry(p)
        m = pillar_mech_mode(g)
        em = gxm_pillar(g, m)
        gcx = gcx_pillar(ex.radiative_halfwidth, g.dbr, m.eta_e)
        return [
            _col("G_xm", em.G, "THz/nm"),
            _col("g_xm", em.g, "MHz"),
            _col("g_cx", gcx, "THz"),
            _col("rabi_splitting", rabi_splitting(gcx), "meV"),
            _col("mech_omega", m.omega, "GHz"),
        ]
    g = _planar_geometry(p)
    count = p["modes.mech_count"]
    if p["geometry.kind"] == "disk":
        pair = disk_pair(g, count, p["modes.p_max"])
    else:
        pair = best_planar_pair(g, [mech_ring(g, n) for n in range(1, count + 1)], p["modes.p_max"])
    gcx = gcx_planar(ex, pair.optical.slab, g.qw_positions)
    return [
        _col("g_xm", pair.coupling.g, "MHz"),
        _col("G_xm", pair.coupling.G, "THz/nm"),
        _col("mech_n", pair.mech.n),
        _col("wgm_p", pair.optical.p),
        _col("wgm_l", pair.optical.l),
        _col("mech_omega", pair.mech.omega, "GHz"),
        _col("g_cx", gcx, "THz"),
        _col("rabi_splitting", rabi_splitting(gcx), "meV"),
    ]


def cmd_coopmap(p: Params):
    from .couplings import cooperativity_map

    if p["geometry.kind"] != "pillar":
        raise ConfigInvalid("coopmap needs a pillar geometry", field="geometry.kind")
    g = _pillar_geometry(p)
    c0 = cooperativity_map(
        [g.radius], [p["polariton.exciton_fraction"]], g.dbr, g.qw_offsets, p["polariton.G_cm"], p["polariton.kappa_c"], p["polariton.kappa_x"], p["polariton.gamma"],
        n_pairs=g.n_pairs, sound_speed=g.sound_speed, cutoff_omega=g.cutoff_omega, high=g.high, low=g.low,
    )[0, 0]
    return [_col("cooperativity", c0)]


def _drive(p: Params):
    from .dynamics import DriveConfig

    kappa = p["drive.kappa"]
    return DriveConfig(p["drive.detuning"], p["drive.n_in_per_kappa"] * kappa, p["drive.kappa_r"], kappa, p["drive.gamma"], p["drive.omega"], p["drive.g"], p["drive.chi"])


def _point(p: Params):
    from .fluctuations import OperatingPoint

    return OperatingPoint(p["drive.detuning"], p["drive.n"], p["drive.kappa"], p["drive.omega"], p["drive.gamma"], p["drive.g"], p["drive.chi"])


def cmd_stability(p: Params):
    from .dynamics import classify

    cls = classify(_drive(p))
    ns = [r.n for r in cls.roots]
    return [
        _col("label", cls.label),
        _col("roots", len(ns)),
        _col("n_low", min(ns)),
        _col("n_high", max(ns)),
        _col("max_growth", cls.max_growth, "1/s"),
    ]


def cmd_damping(p: Params):
    from .fluctuations import best_amplification, best_cooling_rate, enhancement

    pt = _point(p)
    route = p["damping.route"]
    ds, dt, eta = enhancement(pt)
    d_cool, cool = best_cooling_rate(pt, route)
    d_amp, amp = best_amplification(pt, route)
    return [
        _col("eta_minus", eta[0]),
        _col("eta_plus", eta[1]),
        _col("detuning_minus", dt[0], "GHz"),
        _col("detuning_plus", dt[1], "GHz"),
        _col("best_cooling_detuning", d_cool, "GHz"),
        _col("best_cooling_rate", cool, "1/s"),
        _col("best_amplification_detuning", d_amp, "GHz"),
        _col("best_amplification_rate", amp, "1/s"),
        _col("omo", bool(pt.gamma + amp < 0)),
    ]


def cmd_cool(p: Params):
    from .fluctuations import optimal_cooling

    d, occ = optimal_cooling(_point(p), p["drive.temperature"], p["cool.method"])
    return [_col("optimal_detuning", d, "GHz"), _col("n_eff", occ.n_eff), _col("n_th", occ.n_th)]


def cmd_psd(p: Params):
    from .fluctuations import displacement_psd, exact_qle_spectrum

    fn = exact_qle_spectrum if p["spectrum.route"] == "exact" else displacement_psd
    s = fn(_point(p), p["drive.temperature"], [p["spectrum.frequency"]]).s_qq[0]
    return [_col("s_qq", s, "x_zpf^2 s/rad")]


def cmd_phonoriton(p: Params):
    from .fluctuations import phonoriton_modes

    pm = phonoriton_modes(_point(p))
    lo, hi = sorted(pm.omega_pn, key=lambda z: z.real)
    return [
        _col("omega_low", lo.real, "GHz"),
        _col("width_low", -2 * lo.imag, "GHz"),
        _col("omega_high", hi.real, "GHz"),
        _col("width_high", -2 * hi.imag, "GHz"),
        _col("splitting_real", pm.splitting.real, "GHz"),
        _col("splitting_imag", pm.splitting.imag, "GHz"),
        _col("anticrossing", bool(pm.splitting.imag == 0 and pm.splitting.real > 0)),
    ]


_GEOMETRY = ("geometry.kind", "geometry.radius")
_POINT = ("drive.detuning", "drive.n", "drive.kappa", "drive.omega", "drive.gamma", "drive.g", "drive.chi")
_POLARITON = tuple(f"polariton.{k}" for k in SCHEMA["polariton"])
_DRIVE = ("drive.detuning", "drive.n_in_per_kappa", "drive.kappa_r", "drive.kappa", "drive.omega", "drive.gamma", "drive.g", "drive.chi")

# name -> (row function, module reported on compute errors, required keys)
COMMANDS = {
    "exciton": (cmd_exciton, "exciton", ()),
    "modes": (cmd_modes, "modes", _GEOMETRY),
    "couplings": (cmd_couplings, "couplings", _GEOMETRY),
    "coopmap": (cmd_coopmap, "couplings", _GEOMETRY + _POLARITON),
    "stability": (cmd_stability, "dynamics", _DRIVE),
    "damping": (cmd_damping, "fluctuations", _POINT),
    "cool": (cmd_cool, "fluctuations", _POINT),
    "psd": (cmd_psd, "fluctuations", _POINT + ("spectrum.frequency",)),
    "phonoriton": (cmd_phonoriton, "fluctuations", _POINT),
}
# per-row outcomes that are physics, not failures
ROW_STATUS = {UnstablePoint: "unstable", SqueezeDiverges: "squeeze-diverges"}


# ---------------------------------------------------------------- running


@dataclass
class OutputTable:
    metadata: dict[str, str]
    columns: list[str]
    units: list[str]
    rows: list[list]


def active_sweeps(cfg: ScenarioConfig, command: str) -> tuple[Sweep, ...]:
    return tuple(s for s in cfg.sweeps if s.applies(command))


def sweep_grid(cfg: ScenarioConfig, command: str) -> list[dict[str, float]]:
    """Row-major product of the sweeps (first sweep outermost); one empty point without sweeps."""
    points = [{}]
    for s in active_sweeps(cfg, command):
        points = [{**pt, s.variable: x} for pt in points for x in s.grid]
    return points


def _load_materials(cfg: ScenarioConfig, override: str | Path | None):
    from .materials import load_table

    path = override or cfg.values.get("materials.path")
    if path is None:
        return None
    path = Path(path)
    if override is None and not path.is_absolute():
        path = cfg.base_dir / path
    return load_table(path)


def run_scenario(cfg: ScenarioConfig, command: str, threads: int = 1, materials: str | Path | None = None) -> OutputTable:
    if command not in COMMANDS:
        raise ConfigInvalid(f"unknown command {command!r}")
    fn, module, required = COMMANDS[command]
    sweeps = active_sweeps(cfg, command)
    swept = {s.variable for s in sweeps}
    for key in required:
        if key not in swept and cfg.values.get(key) is None:
            sec = key.partition(".")[0]
            raise ConfigInvalid(f"required by {command}", field=key, line=_line_of(cfg.text, sec))
    if "geometry.kind" in required and cfg.values["geometry.kind"] == "ring" and not cfg.values["geometry.inner_radius"] > 0 and "geometry.inner_radius" not in swept:
        raise ConfigInvalid("a ring needs inner_radius > 0", field="geometry.inner_radius", line=_line_of(cfg.text, "geometry", "inner_radius"))
    table = _load_materials(cfg, materials)
    points = sweep_grid(cfg, command)

    def row(pt):
        params = Params({**cfg.values, **pt}, table)
        try:
            return fn(params), "ok"
        except tuple(ROW_STATUS) as exc:
            return None, next(v for k, v in ROW_STATUS.items() if isinstance(exc, k))
        except ConfigInvalid:
            raise
        except (PolaromechError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            raise ComputeError(module, exc) from exc

    if threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(row, points))
    else:
        results = [row(pt) for pt in points]
    template = next((r for r, _ in results if r is not None), None)
    if template is None:
        raise ComputeError(module, UnstablePoint(f"no grid point could be evaluated ({results[0][1]})"))
    sweep_cols = [(s.variable, s.unit or "1") for s in sweeps]
    columns = [v for v, _ in sweep_cols] + [c[0] for c in template] + ["status"]
    units = [u for _, u in sweep_cols] + [c[1] for c in template] + [""]
    rows = []
    for pt, (cols, status) in zip(points, results):
        lead = [pt[v] / (UNITS[u][0] if u in UNITS else 1.0) for v, u in sweep_cols]
        body = [c[2] for c in cols] if cols is not None else [math.nan] * len(template)
        rows.append(lead + body + [status])
    meta = {
        "polaromech": __version__,
        "command": command,
        "config": cfg.name,
        "config_sha256": cfg.sha256,
        "rows": str(len(rows)),
    }
    return OutputTable(meta, columns, units, rows)


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_csv(table: OutputTable, timestamp: str | None = None) -> str:
    buf = io.StringIO()
    for k, v in table.metadata.items():
        buf.write(f"# {k} = {v}\n")
    if timestamp:
        buf.write(f"# created = {timestamp}\n")
    buf.write("# units = " + ", ".join(f"{c} [{u}]" for c, u in zip(table.columns, table.units) if u) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def format_json(table: OutputTable, timestamp: str | None = None) -> str:
    def clean(v):
        return None if isinstance(v, float) and not math.isfinite(v) else v

    meta = dict(table.metadata, **({"created": timestamp} if timestamp else {}))
    doc = {"metadata": meta, "columns": table.columns, "units": table.units, "rows": [[clean(v) for v in r] for r in table.rows]}
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def write_outputs(table: OutputTable, cfg: ScenarioConfig, out_dir: Path, fmt: str, timestamp: bool = False) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamp else None
    stem = f"{Path(cfg.name).stem}_{table.metadata['command']}"
    paths = [out_dir / f"{stem}.csv"]
    paths[0].write_text(format_csv(table, stamp), encoding="utf-8")
    if fmt == "json":
        paths.append(out_dir / f"{stem}.json")
        paths[1].write_text(format_json(table, stamp), encoding="utf-8")
    return paths


# ---------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polaromech", description="Polariton optomechanics scenarios and sweeps.")
    ap.add_argument("command", choices=["run", "list", *COMMANDS], help="subcommand; 'run' executes the commands listed in the config, 'list' shows bundled configs")
    ap.add_argument("--config", help="scenario file, or the name of a bundled config")
    ap.add_argument("--out", help="output directory (default: output.path of the config)")
    ap.add_argument("--format", choices=["csv", "json"], help="csv, or json to add a JSON mirror of each table")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for sweep points")
    ap.add_argument("--materials", help="material table overriding the built-in one")
    ap.add_argument("--timestamp", action="store_true", help="add a creation time to the metadata")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        print("\n".join(bundled_configs()))
        return EXIT_OK
    try:
        if args.config is None:
            raise ConfigInvalid("--config is required")
        if args.threads < 1:
            raise ConfigInvalid("--threads must be >= 1")
        cfg = load_config(args.config)
        commands = cfg.commands if args.command == "run" else (args.command,)
        if not commands:
            raise ConfigInvalid("no commands listed", field="scenario.commands")
        out = Path(args.out or cfg.values["output.path"])
        fmt = args.format or cfg.values["output.format"]
        for cmd in commands:
            table = run_scenario(cfg, cmd, args.threads, args.materials)
            for path in write_outputs(table, cfg, out, fmt, args.timestamp):
                print(path)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PolaromechError as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
