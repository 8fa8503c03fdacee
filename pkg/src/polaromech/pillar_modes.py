"""Micropillar cavity: DBR dispersion, optical envelopes and the fundamental
longitudinal mechanical mode.

The pillar is a lambda/2 GaAs spacer between two GaAs/AlAs quarter-wave
mirrors. Along z the field is approximated by an exponentially damped
standing wave, checked against a transfer-matrix solution of the finite stack.
In the plane the fundamental mode is J0 in an infinite circular well.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np
from scipy import constants as sc
from scipy.optimize import newton
from scipy.special import j0, j1, jn_zeros

from .errors import OutOfRange, QWOutsideSpacer, SingularTransfer
from .materials import MaterialParams, lookup_material
from .planar_modes import zero_point_amplitude
from .units import parse_quantity

ALPHA01 = float(jn_zeros(0, 1)[0])


# ------------------------------------------------------------------- DBR


@dataclass(frozen=True)
class DBRModel:
    n1: float
    n2: float
    wavelength: float

    def __post_init__(self):
        if not self.n1 >= self.n2 > 1:
            raise OutOfRange("need n1 >= n2 > 1")

    @property
    def d1(self) -> float:
        return self.wavelength / (4 * self.n1)

    @property
    def d2(self) -> float:
        return self.wavelength / (4 * self.n2)

    @property
    def period(self) -> float:
        return self.d1 + self.d2

    @property
    def delta_n(self) -> float:
        return self.n1 - self.n2

    @property
    def k0(self) -> float:
        return 2 * np.pi / self.wavelength

    @property
    def effective_index(self) -> float:
        """Real index at the stop-band centre, 2 n1 n2/(n1 + n2)."""
        return 2 * self.n1 * self.n2 / (self.n1 + self.n2)

    @property
    def penetration_length(self) -> float:
        """L~ with 2 L~ = lambda0 / (2 dn); infinite without contrast."""
        return np.inf if self.delta_n == 0 else self.wavelength / (4 * self.delta_n)

    @property
    def beta(self) -> float:
        """Propagation constant n_eff k0 of the cavity envelope."""
        return self.effective_index * self.k0

    def bloch_phase(self, wavelength) -> np.ndarray:
        """Complex Bloch phase beta_z d per period; Im > 0 inside the stop band."""
        k = 2 * np.pi / np.asarray(wavelength, float)
        a, b = self.n1 * self.d1 * k, self.n2 * self.d2 * k
        rhs = np.cos(a) * np.cos(b) - (self.n1**2 + self.n2**2) / (2 * self.n1 * self.n2) * np.sin(a) * np.sin(b)
        phase = np.arccos(rhs.astype(complex))
        return np.where(phase.imag < 0, np.conj(phase), phase)

    def complex_index(self, wavelength) -> np.ndarray:
        """n_eff(lambda) = beta_z / k: real outside the stop band, complex inside."""
        k = 2 * np.pi / np.asarray(wavelength, float)
        return self.bloch_phase(wavelength) / (self.period * k)


def dbr_dispersion(n1: float, n2: float, wavelength: float = 850e-9) -> DBRModel:
    return DBRModel(float(n1), float(n2), float(wavelength))


# --------------------------------------------------------------- geometry


@dataclass(frozen=True)
class PillarGeometry:
    """Half-stack: spacer half, ``n_pairs`` (AlAs, GaAs) pairs and a closing AlAs layer."""

    radius: float
    dbr: DBRModel
    n_pairs: int = 25
    qw_offsets: tuple[float, ...] = ()
    sound_speed: float = 5270.0
    cutoff_omega: float = 2 * np.pi * 19.5e9
    high: MaterialParams = field(default_factory=lambda: lookup_material("GaAs"), repr=False)
    low: MaterialParams = field(default_factory=lambda: lookup_material("AlAs"), repr=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise OutOfRange("pillar radius must be positive")
        if self.n_pairs < 1:
            raise OutOfRange("need at least one mirror pair")
        object.__setattr__(self, "qw_offsets", tuple(float(z) for z in self.qw_offsets))
        for dz in self.qw_offsets:
            if abs(dz) > self.spacer_half:
                raise QWOutsideSpacer(f"QW offset {dz * 1e9:.1f} nm outside the {self.spacer_half * 1e9:.1f} nm half-spacer")

    @property
    def spacer_half(self) -> float:
        return self.dbr.d1

    def half_stack(self) -> list[tuple[float, float, float]]:
        """(index, thickness, density) of each layer from z = 0 upwards."""
        d = self.dbr
        hi = (d.n1, d.d1, self.high.density)
        lo = (d.n2, d.d2, self.low.density)
        return [hi] + [lo, hi] * self.n_pairs + [lo]


# ----------------------------------------------------------------- optics


def reduction_point(dbr: DBRModel) -> float:
    """z* > 0 where exp(-z/2L~) sin(beta z) peaks: cos(beta z*) = (1 + 4 beta^2 L~^2)^(-1/2)."""
    b, lt = dbr.beta, dbr.penetration_length
    return np.arccos(1 / np.sqrt(1 + 4 * b * b * lt * lt)) / b


def envelope_peak(dbr: DBRModel) -> float:
    z = reduction_point(dbr)
    return float(np.exp(-z / (2 * dbr.penetration_length)) * np.sin(dbr.beta * z))


@dataclass(frozen=True)
class PillarOpticalMode:
    geometry: PillarGeometry = field(repr=False)

    @property
    def dbr(self) -> DBRModel:
        return self.geometry.dbr

    @property
    def vertical_normalization(self) -> float:
        b, lt = self.dbr.beta, self.dbr.penetration_length
        return np.sqrt((1 + 4 * b * b * lt * lt) / (4 * b * b * lt**3))

    @property
    def radial_normalization(self) -> float:
        return 1 / (np.sqrt(np.pi) * j1(ALPHA01) * self.geometry.radius)

    @property
    def transverse_wavevector(self) -> float:
        return ALPHA01 / self.geometry.radius

    @property
    def omega(self) -> float:
        """Paraxial cavity frequency including the transverse confinement shift."""
        base = sc.c * self.dbr.k0
        return base * (1 + 0.5 * (self.transverse_wavevector / self.dbr.beta) ** 2)

    @property
    def effective_length(self) -> float:
        """2 L~ + L_sp with L_sp = lambda0 / (2 n_eff)."""
        d = self.dbr
        return 2 * d.penetration_length + d.wavelength / (2 * d.effective_index)

    def vertical(self, z) -> np.ndarray:
        z = np.asarray(z, float)
        d = self.dbr
        return self.vertical_normalization * np.exp(-np.abs(z) / (2 * d.penetration_length)) * np.sin(d.beta * z)

    def radial(self, r) -> np.ndarray:
        r = np.asarray(r, float)
        return np.where(r <= self.geometry.radius, self.radial_normalization * j0(self.transverse_wavevector * r), 0.0)


def vertical_envelope(geometry: PillarGeometry) -> PillarOpticalMode:
    return PillarOpticalMode(geometry)


def _layer_step(n, d, k0):
    delta = n * k0 * d
    c, s = np.cos(delta), np.sin(delta)
    return np.array([[c, 1j * s / n], [1j * n * s, c]])


def transfer_matrix_envelope(geometry: PillarGeometry, points_per_layer: int = 200):
    """Exact odd standing wave of the finite stack at lambda0, z >= 0.

    Starts from E(0) = 0, E'(0) = 1 and carries (E, E') through each layer.
    Returns (z, u) with int_{-L}^{L} u^2 dz = 1 over the full stack.
    """
    d = geometry.dbr
    k0 = d.k0
    zs, us = [], []
    e, de, z0 = 0.0, 1.0, 0.0
    for n, thick, _ in geometry.half_stack():
        if not thick > 0 or not np.isfinite(thick):
            raise SingularTransfer(f"layer thickness {thick} is not physical")
        q = n * k0
        zz = np.linspace(0.0, thick, points_per_layer, endpoint=False)
        zs.append(z0 + zz)
        us.append(e * np.cos(q * zz) + de / q * np.sin(q * zz))
        e, de = e * np.cos(q * thick) + de / q * np.sin(q * thick), -e * q * np.sin(q * thick) + de * np.cos(q * thick)
        z0 += thick
    z = np.append(np.concatenate(zs), z0)
    u = np.append(np.concatenate(us), e)
    u /= np.sqrt(2 * np.trapezoid(u * u, z))
    return z, u


@dataclass(frozen=True)
class EnvelopeComparison:
    overlap_defect: float  # 1 - <u_exact|u_approx> = (1/2) int (du)^2
    relative_l2: float
    mean_abs_relative: float  # mean |du| / max |u|


def envelope_deviation(geometry: PillarGeometry, points_per_layer: int = 200) -> EnvelopeComparison:
    """Compare the damped-sine envelope with the transfer-matrix field."""
    z, exact = transfer_matrix_envelope(geometry, points_per_layer)
    approx = vertical_envelope(geometry).vertical(z)
    approx = approx / np.sqrt(2 * np.trapezoid(approx**2, z))
    diff = exact - approx
    sq = 2 * np.trapezoid(diff**2, z)
    return EnvelopeComparison(0.5 * sq, np.sqrt(sq), float(np.mean(np.abs(diff)) / np.abs(exact).max()))


def _cavity_stack(geometry: PillarGeometry, closing_layer: bool):
    d = geometry.dbr
    mirror = [(d.n2, d.d2), (d.n1, d.d1)] * geometry.n_pairs
    if closing_layer:
        mirror.append((d.n2, d.d2))
    return mirror[::-1] + [(d.n1, 2 * d.d1)] + mirror


def cavity_resonance(
    geometry: PillarGeometry,
    substrate_index: float | None = None,
    top_index: float = 1.0,
    closing_layer: bool = False,
) -> complex:
    """Complex angular frequency of the quasi-normal mode nearest lambda0.

    Each mirror is ``n_pairs`` (AlAs, GaAs) pairs counted from the spacer,
    so a GaAs layer faces air on top and the substrate (GaAs by default)
    below; ``closing_layer`` appends one more AlAs layer to both mirrors.
    Only outgoing waves are allowed outside. The full linewidth in rad/s is
    -2 Im(omega).
    """
    sub = geometry.dbr.n1 if substrate_index is None else substrate_index
    layers = _cavity_stack(geometry, closing_layer)

    def mismatch(k0):
        vec = np.array([1.0, -sub], dtype=complex)
        for n, t in layers:
            vec = _layer_step(n, t, k0) @ vec
        return vec[1] - top_index * vec[0]

    k = newton(mismatch, geometry.dbr.k0 * (1 - 1e-6j), tol=1e-14 * geometry.dbr.k0, maxiter=200)
    return complex(sc.c * k)


def radiative_linewidth(geometry: PillarGeometry, **kwargs) -> float:
    """Radiative full width kappa_rad in rad/s."""
    return -2 * cavity_resonance(geometry, **kwargs).imag


# -------------------------------------------------------------- mechanics


@lru_cache(maxsize=None)
def _calibration() -> dict[str, float]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string(resources.files("polaromech.data").joinpath("calibration.cfg").read_text())
    sec = parser["pillar effective mass"]
    return {
        "factor": float(sec["factor"]),
        "anchor_radius": parse_quantity(sec["anchor_radius"], "m"),
        "anchor_mass": parse_quantity(sec["anchor_mass"], "kg"),
    }


def mass_calibration_factor() -> float:
    return _calibration()["factor"]


def line_density(geometry: PillarGeometry, points_per_layer: int = 200) -> float:
    """rho~ = int rho(z) d(z)^2 dz with d = exp(-|z|/2L~) sin(beta z) / max."""
    dbr = geometry.dbr
    peak = envelope_peak(dbr)
    total, z0 = 0.0, 0.0
    for _, thick, rho in geometry.half_stack():
        z = np.linspace(z0, z0 + thick, points_per_layer)
        d = np.exp(-z / (2 * dbr.penetration_length)) * np.sin(dbr.beta * z) / peak
        total += rho * np.trapezoid(d * d, z)
        z0 += thick
    return 2 * total


def uncalibrated_mass(geometry: PillarGeometry) -> float:
    return np.pi * j1(ALPHA01) ** 2 * geometry.radius**2 * line_density(geometry)


def calibrate_mass_factor(geometry: PillarGeometry, target_mass: float) -> float:
    """Factor mapping the unit-amplitude modal mass onto ``target_mass``."""
    return target_mass / uncalibrated_mass(geometry)


@dataclass(frozen=True)
class PillarMechMode:
    omega: float
    cutoff_omega: float
    sound_speed: float
    mass: float
    x_zpf: float
    strain_normalization: float  # N_Sigma
    eta_s: tuple[float, ...]
    eta_e: tuple[float, ...]
    geometry: PillarGeometry = field(repr=False)

    @property
    def frequency(self) -> float:
        return self.omega / (2 * np.pi)

    @property
    def wavevector(self) -> float:
        """Phonon wavevector k_m = n_eff k0."""
        return self.geometry.dbr.beta

    def displacement(self, r, z) -> np.ndarray:
        """Longitudinal displacement, unit amplitude at the reduction point."""
        dbr = self.geometry.dbr
        r, z = np.broadcast_arrays(np.asarray(r, float), np.asarray(z, float))
        radial = j0(ALPHA01 * r / self.geometry.radius)
        return radial * np.exp(-np.abs(z) / (2 * dbr.penetration_length)) * np.sin(dbr.beta * z) / envelope_peak(dbr)

    def strain(self, r, z) -> np.ndarray:
        """Sigma = d/dz of the displacement, = N_Sigma u^r du^z/dz."""
        dbr = self.geometry.dbr
        r, z = np.broadcast_arrays(np.asarray(r, float), np.asarray(z, float))
        lt, b = dbr.penetration_length, dbr.beta
        damp = np.exp(-np.abs(z) / (2 * lt))
        dz = damp * (b * np.cos(b * z) - np.sign(z) / (2 * lt) * np.sin(b * z))
        return j0(ALPHA01 * r / self.geometry.radius) * dz / envelope_peak(dbr)


def field_reductions(dbr: DBRModel, offsets) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """(eta_S, eta_E) = (|cos|, |sin|)(n_eff k0 dz) for each QW offset."""
    phase = dbr.beta * np.asarray(offsets, float)
    return tuple(np.abs(np.cos(phase)).tolist()), tuple(np.abs(np.sin(phase)).tolist())


def pillar_mech_mode(geometry: PillarGeometry, mass_factor: float | None = None) -> PillarMechMode:
    """Fundamental longitudinal mode of the pillar.

    Omega^2 = Omega_0^2 + (alpha01 v_S / 2 R)^2. The modal mass is
    pi J1(alpha01)^2 R^2 rho~ times the frozen calibration factor.
    """
    factor = mass_calibration_factor() if mass_factor is None else mass_factor
    omega = np.hypot(geometry.cutoff_omega, ALPHA01 * geometry.sound_speed / (2 * geometry.radius))
    mass = factor * uncalibrated_mass(geometry)
    optics = PillarOpticalMode(geometry)
    n_sigma = 1 / (envelope_peak(geometry.dbr) * optics.vertical_normalization * optics.radial_normalization)
    eta_s, eta_e = field_reductions(geometry.dbr, geometry.qw_offsets)
    return PillarMechMode(
        omega=float(omega),
        cutoff_omega=geometry.cutoff_omega,
        sound_speed=geometry.sound_speed,
        mass=float(mass),
        x_zpf=float(zero_point_amplitude(mass, omega)),
        strain_normalization=float(n_sigma),
        eta_s=eta_s,
        eta_e=eta_e,
        geometry=geometry,
    )
