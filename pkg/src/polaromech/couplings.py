"""Pairwise coupling rates, the polariton basis and cooperativity.

All rates are angular frequencies (rad/s); per-displacement couplings G are
in rad/s per metre. The mechanical mode phase is chosen so that the
exciton-phonon overlap is positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import constants as sc
from scipy.integrate import quad
from scipy.special import j0, j1, jn_zeros

from .errors import GridMismatch, OutOfRange, QuadratureNotConverged
from .exciton import ExcitonState, QWSpec
from .pillar_modes import (
    ALPHA01,
    DBRModel,
    PillarGeometry,
    PillarMechMode,
    PillarOpticalMode,
    pillar_mech_mode,
)
from .planar_modes import (
    MechModePlanar,
    OpticalModeWGM,
    PlanarGeometry,
    StrainField,
    plane_stress_factor,
    rbm_disk,
    wgm_mode,
)

# --------------------------------------------------------------- types


class Electromechanical(NamedTuple):
    G: float  # rad/s per metre of mode amplitude
    g: float  # rad/s per phonon


@dataclass(frozen=True)
class CouplingSet:
    """Bare-mode couplings. g_cm and g_xm are derived from G * x_ZPF."""

    g_cx: float
    G_cm: float
    G_xm: float
    x_zpf: float
    g_xx: float  # J m^2
    area: float  # m^2, modal area attached to g_xx
    k_m: float = float("nan")
    I_g: float = float("nan")

    @property
    def g_cm(self) -> float:
        return self.G_cm * self.x_zpf

    @property
    def g_xm(self) -> float:
        return self.G_xm * self.x_zpf

    @property
    def chi(self) -> float:
        """g_xx / A as an angular frequency."""
        return self.g_xx / (self.area * sc.hbar)


@dataclass(frozen=True)
class PolaritonBasis:
    theta: float
    detuning: float  # omega_c - omega_x
    omega_l: float
    omega_u: float
    g_lm: float
    g_um: float
    g_lu: float
    chi_l: float
    chi_u: float
    kappa_l: float
    kappa_u: float

    @property
    def exciton_fraction(self) -> float:
        return float(np.sin(self.theta) ** 2)

    @property
    def photon_fraction(self) -> float:
        return float(np.cos(self.theta) ** 2)


# ------------------------------------------------------------ helpers


def _panels(a: float, b: float, n_panels: int, order: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    x, w = leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def _planar_profile(optical: OpticalModeWGM, mech: MechModePlanar):
    if optical.geometry is not mech.geometry and optical.geometry != mech.geometry:
        raise GridMismatch("optical and mechanical modes belong to different resonators")
    factor = plane_stress_factor(mech.geometry.material.poisson_ratio)
    g = mech.geometry
    return g.inner_radius, g.outer_radius, optical.intensity, lambda r: factor * mech.divergence(r)


def _pillar_profile(optical: PillarOpticalMode, mech: PillarMechMode):
    if optical.geometry != mech.geometry:
        raise GridMismatch("optical and mechanical modes belong to different pillars")
    radius = mech.geometry.radius
    return 0.0, radius, lambda r: optical.radial(r) ** 2, lambda r: j0(ALPHA01 * np.asarray(r) / radius)


def _axial_strain(mech) -> callable:
    if isinstance(mech, PillarMechMode):
        return lambda z: mech.strain(0.0, z)
    return lambda z: np.ones_like(np.asarray(z, float))


def _deformation(mech) -> tuple[float, float]:
    mat = mech.geometry.high if isinstance(mech, PillarMechMode) else mech.geometry.material
    return mat.deformation_potential_e, mat.deformation_potential_h


# ------------------------------------------------------- electromechanics


def gxm_overlap(optical, strain, z_qw: float = 0.0, n_panels: int = 512) -> Electromechanical:
    """G_xm = (a_h - a_e)/hbar int |E(R)|^2 Sigma(R, z_QW) dR and g_xm = G_xm x_ZPF.

    ``strain`` is a planar mechanical mode, a sampled :class:`StrainField`
    (integrated on its own polar grid) or a pillar mechanical mode.
    """
    if isinstance(strain, StrainField):
        g = optical.geometry
        if strain.r[0] < g.inner_radius * (1 - 1e-9) or strain.r[-1] > g.outer_radius * (1 + 1e-9):
            raise GridMismatch("strain grid extends beyond the optical resonator")
        if strain.sigma.shape != (strain.r.size, strain.theta.size):
            raise GridMismatch("strain samples do not match their grid")
        mat = g.material
        da = mat.deformation_potential_h - mat.deformation_potential_e
        ring = strain.sigma.mean(axis=1) * 2 * np.pi
        overlap = float(np.trapezoid(optical.intensity(strain.r) * ring * strain.r, strain.r))
        G = da / sc.hbar * abs(overlap)
        return Electromechanical(G, G * strain.x_zpf)

    if isinstance(strain, MechModePlanar):
        r0, r1, intensity, radial = _planar_profile(optical, strain)
        if strain.m != 0:
            return Electromechanical(0.0, 0.0)
    elif isinstance(strain, PillarMechMode):
        r0, r1, intensity, radial = _pillar_profile(optical, strain)
    else:
        raise TypeError(f"unsupported strain type {type(strain).__name__}")
    e_def, h_def = _deformation(strain)
    r, w = _panels(r0, r1, n_panels)
    overlap = 2 * np.pi * np.sum(w * r * intensity(r) * radial(r)) * float(_axial_strain(strain)(z_qw))
    G = (h_def - e_def) / sc.hbar * abs(overlap)
    return Electromechanical(G, G * strain.x_zpf)


def _smeared(radial, R, rho, w_rho, shift, n_angle):
    """Angular and relative-coordinate average of radial(|R + shift rho e^{i phi}|)."""
    phi, w_phi = leggauss(n_angle)
    phi = 0.5 * np.pi * (phi + 1)
    w_phi = 0.5 * w_phi  # mean over [0, pi]
    s = shift * rho
    out = np.empty(R.size)
    for i, big in enumerate(R):
        d = np.sqrt(big * big + s[:, None] ** 2 + 2 * big * s[:, None] * np.cos(phi))
        out[i] = np.sum(w_rho * (radial(d) @ w_phi))
    return out


def _support(intensity, r0, r1, floor=1e-14):
    """Sub-interval of [r0, r1] outside which the intensity is below ``floor`` of its peak."""
    r = np.linspace(r0, r1, 4001)
    inside = np.flatnonzero(intensity(r) > floor * intensity(r).max())
    lo, hi = r[max(inside[0] - 1, 0)], r[min(inside[-1] + 1, r.size - 1)]
    return float(lo), float(hi)


def _axial_average(h, envelope, z_qw):
    weight = envelope.chi**2
    return float(np.trapezoid(h(z_qw + envelope.z) * weight, envelope.z) / np.trapezoid(weight, envelope.z))


def gxm_exact(
    optical,
    strain,
    exciton: ExcitonState,
    qw: QWSpec,
    z_qw: float | None = None,
    n_panels: int = 128,
    n_rho: int = 12,
    n_angle: int = 12,
    rtol: float = 1e-7,
) -> float:
    """g_xm from the unreduced exciton-phonon integral.

    Electron and hole sit at R + (m_h/M) rho and R - (m_e/M) rho, each
    weighted by its own deformation potential and growth-axis envelope.
    The quadrature is repeated at doubled resolution and must agree to
    ``rtol``. Only axisymmetric strain is supported.
    """
    if isinstance(strain, MechModePlanar):
        if strain.m != 0:
            raise OutOfRange("exact overlap needs an axisymmetric (m = 0) mode")
        r0, r1, intensity, radial = _planar_profile(optical, strain)
    elif isinstance(strain, PillarMechMode):
        r0, r1, intensity, radial = _pillar_profile(optical, strain)
    else:
        raise TypeError(f"unsupported strain type {type(strain).__name__}")
    z_qw = qw.z_position if z_qw is None else z_qw
    e_def, h_def = _deformation(strain)
    m_e = qw.well.effective_mass_e
    m_h = qw.well.effective_mass_h_inplane
    s_e, s_h = m_h / (m_e + m_h), m_e / (m_e + m_h)
    h = _axial_strain(strain)
    ax_e = _axial_average(h, exciton.electron, z_qw)
    ax_h = _axial_average(h, exciton.hole, z_qw)

    # relative coordinate: |phi|^2 d^2 rho truncated where the tail is negligible
    rho_grid, phi = exciton.rho, exciton.phi
    dens = 2 * np.pi * rho_grid * phi**2
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(rho_grid))])
    rho_max = float(rho_grid[np.searchsorted(cum, cum[-1] * (1 - 1e-12)) if cum[-1] > 0 else -1])
    rho_max = min(rho_max, float(rho_grid[-1]))

    r0, r1 = _support(intensity, r0, r1)

    def evaluate(scale):
        R, wR = _panels(r0, r1, n_panels * scale)
        rho, w = _panels(0.0, rho_max, n_rho * scale)
        w_rho = w * 2 * np.pi * rho * np.interp(rho, rho_grid, phi) ** 2
        w_rho /= w_rho.sum()
        t_e = _smeared(radial, R, rho, w_rho, s_e, n_angle * scale)
        t_h = _smeared(radial, R, rho, w_rho, s_h, n_angle * scale)
        kernel = h_def * ax_h * t_h - e_def * ax_e * t_e
        weight = 2 * np.pi * wR * R * intensity(R)
        return float(np.sum(weight * kernel)), float(np.sum(weight * np.abs(kernel)))

    coarse, _ = evaluate(1)
    fine, scale = evaluate(2)
    if abs(fine - coarse) > rtol * scale:
        raise QuadratureNotConverged(f"exact overlap changed by {abs(fine - coarse) / scale:.2e} on refinement")
    return abs(fine) / sc.hbar * strain.x_zpf


# --------------------------------------------------------------- pillar


def beta0() -> float:
    """2 pi int_0^1 x J0(alpha01 x)^3 dx / J1(alpha01)."""
    val, _ = quad(lambda x: x * j0(ALPHA01 * x) ** 3, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return 2 * np.pi * val / j1(ALPHA01)


def geometric_overlap_pillar(dbr: DBRModel) -> float:
    """I_g = beta0 exp(dn / 2 n_eff) / (pi J1(alpha01))."""
    return beta0() * np.exp(dbr.delta_n / (2 * dbr.effective_index)) / (np.pi * j1(ALPHA01))


def gxm_pillar(geometry: PillarGeometry, mech: PillarMechMode | None = None) -> Electromechanical:
    """(a_h - a_e) k_m I_g times the eta_E^2-weighted mean of eta_S over the QWs."""
    if not geometry.qw_offsets:
        raise OutOfRange("the pillar needs at least one QW")
    mech = pillar_mech_mode(geometry) if mech is None else mech
    eta_s, eta_e = np.asarray(mech.eta_s), np.asarray(mech.eta_e)
    weights = eta_e**2
    mean_s = float(np.sum(weights * eta_s) / np.sum(weights)) if weights.sum() > 0 else float(np.mean(eta_s))
    mat = geometry.high
    da = mat.deformation_potential_h - mat.deformation_potential_e
    G = da / sc.hbar * mech.wavevector * geometric_overlap_pillar(geometry.dbr) * mean_s
    return Electromechanical(G, G * mech.x_zpf)


def pillar_modal_area(radius: float) -> float:
    return np.pi * j1(ALPHA01) ** 2 * radius**2


def inverse_participation_area(optical: OpticalModeWGM, n_panels: int = 512) -> float:
    """1 / int |F|^4 dA for the unit-normalized in-plane profile."""
    g = optical.geometry
    r, w = _panels(g.inner_radius, g.outer_radius, n_panels)
    return 1.0 / (2 * np.pi * np.sum(w * r * optical.intensity(r) ** 2))


# ----------------------------------------------------------- light-matter


_LIGHT_MATTER = sc.e**2 / (2 * sc.epsilon_0 * sc.m_e)


def gcx_planar(exciton: ExcitonState, slab, qw_positions=(0.0,)) -> float:
    """Exciton-photon coupling C/hbar for QWs at ``qw_positions`` in a slab.

    Each QW contributes C_j^2 = hbar^2 e^2/(2 eps0 n_eff^2 m0) (f/S) / L_eff,j
    with L_eff,j = 2 |<chi_e|chi_h> / <chi_e|f|chi_h>|^2, and C^2 = sum_j C_j^2.
    """
    e, h = exciton.electron, exciton.hole
    if e.z.shape != h.z.shape or not np.allclose(e.z, h.z):
        raise GridMismatch("electron and hole envelopes are on different grids")
    product = e.chi * h.chi
    norm = np.trapezoid(product, e.z)
    total = 0.0
    for z in qw_positions:
        weighted = np.trapezoid(product * slab.profile(z + e.z), e.z)
        total += 0.5 * (weighted / norm) ** 2
    neff = slab.effective_index
    return float(np.sqrt(_LIGHT_MATTER / neff**2 * exciton.oscillator_strength * total))


def rabi_splitting(g_cx: float) -> float:
    """hbar Omega_R = 2 hbar g_cx, in joules."""
    return 2 * sc.hbar * g_cx


def gcx_pillar(gamma_x: float, dbr: DBRModel, eta_e, effective_length: float | None = None) -> float:
    """sqrt(2 c Gamma_x / (hbar n_eff L_eff)) (sum eta_E^2)^(1/2).

    ``gamma_x`` is the radiative half-width in joules; L_eff defaults to
    2 L~ + lambda0 / (2 n_eff).
    """
    if not gamma_x > 0:
        raise OutOfRange("gamma_x must be positive")
    neff = dbr.effective_index
    length = 2 * dbr.penetration_length + dbr.wavelength / (2 * neff) if effective_length is None else effective_length
    eta = np.asarray(eta_e, float)
    return float(np.sqrt(2 * sc.c * gamma_x / (sc.hbar * neff * length) * np.sum(eta**2)))


# -------------------------------------------------------- polariton basis


def polariton_transform(omega_c, omega_x, g_cx, g_cm, g_xm, chi_xx, kappa_c, kappa_x) -> PolaritonBasis:
    """Rotate the bare couplings into the lower/upper polariton basis.

    The detuning is omega_c - omega_x; the lower polariton is
    cos(theta) photon + sin(theta) exciton. ``chi_xx`` is g_xx / A in rad/s.
    """
    if not g_cx > 0:
        raise OutOfRange("g_cx must be positive")
    delta = omega_c - omega_x
    split = np.hypot(delta, 2 * g_cx)
    theta = 0.5 * np.arctan2(2 * g_cx, -delta)
    c2, s2 = np.cos(theta) ** 2, np.sin(theta) ** 2
    mean = 0.5 * (omega_c + omega_x)
    return PolaritonBasis(
        theta=float(theta),
        detuning=float(delta),
        omega_l=float(mean - split / 2),
        omega_u=float(mean + split / 2),
        g_lm=float(g_xm * s2 + g_cm * c2),
        g_um=float(g_xm * c2 + g_cm * s2),
        g_lu=float(np.sin(2 * theta) * (g_xm - g_cm) / 2),
        chi_l=float(chi_xx * s2 * s2),
        chi_u=float(chi_xx * c2 * c2),
        kappa_l=float(c2 * kappa_c + s2 * kappa_x),
        kappa_u=float(s2 * kappa_c + c2 * kappa_x),
    )


def cooperativity(g_lm, kappa_l, gamma):
    """C0 = 4 g_lm^2 / (kappa_l Gamma)."""
    kappa_l, gamma = np.asarray(kappa_l, float), np.asarray(gamma, float)
    if np.any(kappa_l <= 0) or np.any(gamma <= 0):
        raise OutOfRange("kappa_l and Gamma must be positive")
    return 4 * np.asarray(g_lm, float) ** 2 / (kappa_l * gamma)


def cooperativity_map(
    radii, exciton_fractions, dbr: DBRModel, qw_offsets, G_cm: float, kappa_c: float, kappa_x: float, gamma: float, **geometry_kw
) -> np.ndarray:
    """C0 over (pillar radius, exciton fraction); rows follow ``radii``."""
    x = np.asarray(exciton_fractions, float)
    if np.any((x < 0) | (x > 1)):
        raise OutOfRange("exciton fractions must lie in [0, 1]")
    out = np.empty((len(radii), x.size))
    for i, radius in enumerate(radii):
        geometry = PillarGeometry(radius, dbr, qw_offsets=tuple(qw_offsets), **geometry_kw)
        mech = pillar_mech_mode(geometry)
        g_xm = gxm_pillar(geometry, mech).g
        g_lm = g_xm * x + G_cm * mech.x_zpf * (1 - x)
        out[i] = cooperativity(g_lm, (1 - x) * kappa_c + x * kappa_x, gamma)
    return out


def interaction_ratio(G_xm: float, mass: float, area: float, omega_m: float, g_xx: float) -> float:
    """2 g^2 / (Omega chi) = hbar^2 G_xm^2 / (rho~ Omega^2 g_xx), rho~ = m / A."""
    return sc.hbar**2 * G_xm**2 * area / (mass * omega_m**2 * g_xx)


# ---------------------------------------------------- planar mode search


@dataclass(frozen=True)
class PlanarPair:
    optical: OpticalModeWGM
    mech: MechModePlanar
    coupling: Electromechanical


def nearest_wgm_orders(geometry: PlanarGeometry, p_max: int = 3) -> list[tuple[int, int]]:
    """For each radial order p, the l whose WGM size parameter k Rd is closest to n_eff k0 Rd."""
    neff = wgm_mode(geometry, 1, 0).effective_index
    target = neff * 2 * np.pi / geometry.wavelength * geometry.outer_radius
    pairs = []
    for p in range(1, p_max + 1):
        # start from the disk estimate, then walk l on the actual resonator roots
        ls = np.arange(0, int(target) + 2)
        l = int(ls[np.argmin([abs(jn_zeros(int(j), p)[-1] - target) for j in ls])])
        size = lambda j: wgm_mode(geometry, p, j).size_parameter
        while l > 0 and abs(size(l - 1) - target) < abs(size(l) - target):
            l -= 1
        while abs(size(l + 1) - target) < abs(size(l) - target):
            l += 1
        pairs.append((p, l))
    return pairs


def best_planar_pair(geometry: PlanarGeometry, mech_modes, p_max: int = 3) -> PlanarPair:
    """Largest g_xm over the given mechanical modes and the WGM index window."""
    best = None
    for p, l in nearest_wgm_orders(geometry, p_max):
        optical = wgm_mode(geometry, p, l)
        for mech in mech_modes:
            c = gxm_overlap(optical, mech)
            if best is None or c.g > best.coupling.g:
                best = PlanarPair(optical, mech, c)
    return best


def disk_pair(geometry: PlanarGeometry, n_max: int = 3, p_max: int = 3) -> PlanarPair:
    return best_planar_pair(geometry, [rbm_disk(geometry, n) for n in range(1, n_max + 1)], p_max)
