"""Parsing of quantities written as ``<number> <unit>``.

Everything is converted to SI. Cyclic frequency units (Hz, GHz, ...) are
converted to angular frequency (rad/s), because every rate in the package is
angular. Write ``rad/s`` explicitly to avoid the 2*pi factor.
"""

from __future__ import annotations

import math
import re

from scipy import constants as sc

_EV = sc.electron_volt

# unit -> (scale to SI, dimension tag)
UNITS: dict[str, tuple[float, str]] = {
    "": (1.0, "1"),
    "m": (1.0, "m"),
    "cm": (1e-2, "m"),
    "mm": (1e-3, "m"),
    "um": (1e-6, "m"),
    "µm": (1e-6, "m"),
    "μm": (1e-6, "m"),
    "nm": (1e-9, "m"),
    "pm": (1e-12, "m"),
    "fm": (1e-15, "m"),
    "s": (1.0, "s"),
    "ms": (1e-3, "s"),
    "us": (1e-6, "s"),
    "ns": (1e-9, "s"),
    "ps": (1e-12, "s"),
    "fs": (1e-15, "s"),
    "rad/s": (1.0, "1/s"),
    "1/s": (1.0, "1/s"),
    "Hz": (2 * math.pi, "1/s"),
    "kHz": (2 * math.pi * 1e3, "1/s"),
    "MHz": (2 * math.pi * 1e6, "1/s"),
    "GHz": (2 * math.pi * 1e9, "1/s"),
    "THz": (2 * math.pi * 1e12, "1/s"),
    "J": (1.0, "J"),
    "eV": (_EV, "J"),
    "meV": (1e-3 * _EV, "J"),
    "ueV": (1e-6 * _EV, "J"),
    "µeV": (1e-6 * _EV, "J"),
    "μeV": (1e-6 * _EV, "J"),
    "ueV*um2": (1e-6 * _EV * 1e-12, "J*m2"),
    "μeV*μm2": (1e-6 * _EV * 1e-12, "J*m2"),
    "K": (1.0, "K"),
    "kg": (1.0, "kg"),
    "g": (1e-3, "kg"),
    "pg": (1e-15, "kg"),
    "Pa": (1.0, "Pa"),
    "MPa": (1e6, "Pa"),
    "GPa": (1e9, "Pa"),
    "kg/m3": (1.0, "kg/m3"),
    "g/cm3": (1e3, "kg/m3"),
    "m/s": (1.0, "m/s"),
    "nm/ps": (1e3, "m/s"),
    "um/ps": (1e6, "m/s"),
    "THz/nm": (2 * math.pi * 1e12 / 1e-9, "1/(s*m)"),
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")


def parse_quantity(text: str, expected: str | None = None) -> float:
    """Convert ``"1.3 um"`` to ``1.3e-6``.

    ``expected`` is a dimension tag from :data:`UNITS`; a mismatch raises
    ``ValueError`` so that a length can never be read as a frequency.
    """
    match = _QUANTITY.match(text)
    if match is None:
        raise ValueError(f"cannot parse quantity {text!r}")
    value, unit = match.groups()
    if unit not in UNITS:
        raise ValueError(f"unknown unit {unit!r} in {text!r}")
    scale, dim = UNITS[unit]
    if expected is not None and dim != expected:
        raise ValueError(f"{text!r} has dimension {dim}, expected {expected}")
    return float(value) * scale


def dimension_of(unit: str) -> str:
    return UNITS[unit][1]
