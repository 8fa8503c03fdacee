"""Material constants and the InGaAs alloy model.

Constants live in ``data/materials.cfg`` (INI sections, values with units)
and are loaded once into an immutable :class:`MaterialTable`. All stored
quantities are SI: energies in joules, densities in kg/m^3, moduli in Pa.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import ConfigInvalid, OutOfRange, UnknownMaterial
from .units import parse_quantity

_MATERIAL_KEYS = {
    "refractive_index": "1",
    "density": "kg/m3",
    "young_modulus": "Pa",
    "poisson_ratio": "1",
    "deformation_potential_e": "J",
    "deformation_potential_h": "J",
    "effective_mass_e": "1",
    "luttinger_gamma1": "1",
    "luttinger_gamma2": "1",
    "dielectric_constant": "1",
    "sound_speed_LA": "m/s",
    "kane_energy": "J",
    "bandgap": "J",
}


@dataclass(frozen=True)
class MaterialParams:
    name: str
    refractive_index: float
    density: float
    young_modulus: float
    poisson_ratio: float
    deformation_potential_e: float
    deformation_potential_h: float
    effective_mass_e: float
    luttinger_gamma1: float
    luttinger_gamma2: float
    dielectric_constant: float
    sound_speed_LA: float
    kane_energy: float
    bandgap: float

    @property
    def lame_mu(self) -> float:
        return self.young_modulus / (2 * (1 + self.poisson_ratio))

    @property
    def lame_lambda(self) -> float:
        nu = self.poisson_ratio
        return self.young_modulus * nu / ((1 + nu) * (1 - 2 * nu))

    @property
    def effective_mass_h(self) -> float:
        """Heavy-hole mass along the growth axis, 1/(gamma1 - 2 gamma2)."""
        return 1.0 / (self.luttinger_gamma1 - 2 * self.luttinger_gamma2)

    @property
    def effective_mass_h_inplane(self) -> float:
        """Heavy-hole mass in the QW plane, 1/(gamma1 + gamma2)."""
        return 1.0 / (self.luttinger_gamma1 + self.luttinger_gamma2)

    @property
    def plane_stress_sound_speed(self) -> float:
        nu = self.poisson_ratio
        return math.sqrt(self.young_modulus / (self.density * (1 - nu * nu)))

    @property
    def deformation_potential_difference(self) -> float:
        """a_h - a_e in joules (positive for GaAs)."""
        return self.deformation_potential_h - self.deformation_potential_e


@dataclass(frozen=True)
class AlloyModel:
    name: str
    host: str
    end_member: str
    p_max: float
    bandgap_coeffs: tuple[float, float, float]
    offset_coeffs: tuple[float, float, float]

    def _check(self, p: float) -> None:
        if not 0.0 <= p <= self.p_max:
            raise OutOfRange(f"indium fraction {p} outside fit range [0, {self.p_max}]")

    def bandgap(self, p: float) -> float:
        self._check(p)
        c0, c1, c2 = self.bandgap_coeffs
        return c0 + c1 * p + c2 * p * p

    def conduction_offset_fraction(self, p: float) -> float:
        self._check(p)
        c0, c1, c2 = self.offset_coeffs
        return c0 + c1 * p + c2 * p * p


@dataclass(frozen=True)
class MaterialTable:
    materials: dict[str, MaterialParams] = field(hash=False)
    alloys: dict[str, AlloyModel] = field(hash=False)
    source: str = ""

    def __hash__(self) -> int:
        return hash(self.source)


def _parse_table(text: str, source: str) -> MaterialTable:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigInvalid(f"{source}: {exc}") from exc
    materials: dict[str, MaterialParams] = {}
    alloys: dict[str, AlloyModel] = {}
    for section in parser.sections():
        kind, _, name = section.partition(" ")
        body = parser[section]
        if kind == "material":
            values = {}
            for key, dim in _MATERIAL_KEYS.items():
                if key not in body:
                    raise ConfigInvalid(f"{source}: material {name} lacks {key}", field=key)
                try:
                    values[key] = parse_quantity(body[key], dim)
                except ValueError as exc:
                    raise ConfigInvalid(f"{source}: {exc}", field=f"{name}.{key}") from exc
            materials[name] = MaterialParams(name=name, **values)
        elif kind == "alloy":
            try:
                gap = tuple(parse_quantity(body[f"bandgap_c{i}"], "J") for i in range(3))
                off = tuple(float(body[f"offset_c{i}"]) for i in range(3))
                alloys[name] = AlloyModel(
                    name=name,
                    host=body["host"],
                    end_member=body["end_member"],
                    p_max=float(body["p_max"]),
                    bandgap_coeffs=gap,
                    offset_coeffs=off,
                )
            except (KeyError, ValueError) as exc:
                raise ConfigInvalid(f"{source}: alloy {name}: {exc}") from exc
        else:
            raise ConfigInvalid(f"{source}: unknown section [{section}]")
    return MaterialTable(materials=materials, alloys=alloys, source=source)


@lru_cache(maxsize=None)
def default_table() -> MaterialTable:
    text = resources.files("polaromech.data").joinpath("materials.cfg").read_text()
    return _parse_table(text, "built-in materials.cfg")


def load_table(path: str | Path) -> MaterialTable:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read materials file {path}: {exc}") from exc
    return _parse_table(text, str(path))


_ALLOY_NAME = re.compile(r"^InGaAs\(\s*([0-9.eE+-]+)\s*\)$")


def lookup_material(name: str, table: MaterialTable | None = None) -> MaterialParams:
    """Return constants for ``GaAs``, ``AlAs`` or ``InGaAs(p)``."""
    table = table or default_table()
    return _lookup(name, table)


@lru_cache(maxsize=256)
def _lookup(name: str, table: MaterialTable) -> MaterialParams:
    if name in ("GaAs", "AlAs") and name in table.materials:
        return table.materials[name]
    match = _ALLOY_NAME.match(name)
    if match is None:
        raise UnknownMaterial(name)
    try:
        p = float(match.group(1))
    except ValueError:
        raise UnknownMaterial(name) from None
    return alloy_material(p, table)


def alloy_material(p: float, table: MaterialTable | None = None) -> MaterialParams:
    """In(p)GaAs constants: fitted gap, Vegard mix of elastic constants.

    Effective masses, Kane energy, dielectric constant and refractive index
    stay at the host values; the mass compilation in use covers GaAs only.
    """
    table = table or default_table()
    model = table.alloys["InGaAs"]
    model._check(p)
    host = table.materials[model.host]
    end = table.materials[model.end_member]

    def mix(key: str) -> float:
        return (1 - p) * getattr(host, key) + p * getattr(end, key)

    mixed = ("density", "young_modulus", "poisson_ratio", "deformation_potential_e",
             "deformation_potential_h", "sound_speed_LA")
    return replace(host, name=f"InGaAs({p:g})", bandgap=model.bandgap(p), **{k: mix(k) for k in mixed})


def alloy_band_offsets(p: float, host: MaterialParams, table: MaterialTable | None = None) -> tuple[float, float]:
    """Conduction and valence well depths (J) of In(p)GaAs in ``host``."""
    table = table or default_table()
    model = table.alloys["InGaAs"]
    if host.name != model.host:
        raise UnknownMaterial(f"no alloy fit for host {host.name}")
    gap_drop = model.bandgap(0.0) - model.bandgap(p)
    d_ec = model.conduction_offset_fraction(p) * gap_drop
    return d_ec, gap_drop - d_ec
