"""Shallow quantum-well excitons.

The growth-axis envelopes of the electron and heavy hole are solved on a
finite-difference grid. Their Coulomb interaction, averaged over both
envelopes, gives an in-plane pseudo-potential. The 2D radial problem in that
potential yields the binding energy and the relative-motion envelope. The
in-plane envelope then feeds a Hartree potential back into the growth-axis
problems, and the loop repeats until the binding energy stops moving.

All quantities are SI (metres, joules) unless a name says otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import constants as sc
from scipy.linalg import eigh_tridiagonal

from .errors import GridMismatch, NoBoundState, NotConverged, OutOfRange
from .materials import MaterialParams, MaterialTable, alloy_band_offsets, alloy_material

COULOMB = sc.e**2 / (4 * np.pi * sc.epsilon_0)
MEV = 1e-3 * sc.electron_volt

# Radiative rate per unit oscillator strength density of a QW exciton,
# hbar*Gamma_0 = hbar e^2 / (4 eps0 n c m0) * (f/S)  (Andreani, SI form).
_RADIATIVE_PREFACTOR = sc.hbar * sc.e**2 / (4 * sc.epsilon_0 * sc.c * sc.m_e)

CARRIERS = ("electron", "heavy-hole")


@dataclass(frozen=True)
class QWSpec:
    thickness: float
    indium_fraction: float
    host: MaterialParams
    z_position: float = 0.0
    table: MaterialTable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.thickness > 0:
            raise OutOfRange(f"QW thickness must be positive, got {self.thickness}")
        if not 0.0 <= self.indium_fraction <= 0.25:
            raise OutOfRange(f"indium fraction {self.indium_fraction} outside [0, 0.25]")

    @property
    def well(self) -> MaterialParams:
        return alloy_material(self.indium_fraction, self.table)

    def depth(self, carrier: str) -> float:
        d_ec, d_ev = alloy_band_offsets(self.indium_fraction, self.host, self.table)
        return d_ec if carrier == "electron" else d_ev

    def masses(self, carrier: str) -> tuple[float, float]:
        """(well, barrier) growth-axis masses in units of m0."""
        if carrier == "electron":
            return self.well.effective_mass_e, self.host.effective_mass_e
        return self.well.effective_mass_h, self.host.effective_mass_h

    @property
    def reduced_mass(self) -> float:
        """In-plane electron/heavy-hole reduced mass, units of m0."""
        well = self.well
        return 1.0 / (1.0 / well.effective_mass_e + 1.0 / well.effective_mass_h_inplane)


@dataclass(frozen=True)
class CarrierEnvelope:
    z: np.ndarray
    chi: np.ndarray
    confinement_energy: float  # above the well band edge, Coulomb term excluded
    eigen_energy: float  # relative to the barrier band edge, Coulomb term included
    penetration_depth: float
    carrier: str

    @property
    def step(self) -> float:
        return float(self.z[1] - self.z[0])


def envelope_grid(qw: QWSpec, half_width: float, step: float = 0.05e-9) -> np.ndarray:
    """Uniform grid centred on the well with both well edges on cell midpoints."""
    half_l = qw.thickness / 2
    cells = max(1, round(half_l / step))
    dz = half_l / cells
    n_side = int(np.ceil(half_width / dz))
    return (np.arange(-n_side, n_side) + 0.5) * dz


def _solve_on_grid(qw: QWSpec, carrier: str, z: np.ndarray, extra: np.ndarray | None):
    depth = qw.depth(carrier)
    if depth <= 0:
        raise NoBoundState(f"{carrier}: no confining well for p = {qw.indium_fraction}")
    m_well, m_barrier = qw.masses(carrier)
    inside = np.abs(z) < qw.thickness / 2
    mass = np.where(inside, m_well, m_barrier) * sc.m_e
    v_well = np.where(inside, -depth, 0.0)
    v = v_well if extra is None else v_well + extra
    dz = z[1] - z[0]
    inv_m_mid = 0.5 * (1 / mass[1:] + 1 / mass[:-1])
    hop = sc.hbar**2 * inv_m_mid / (2 * dz**2)
    diag = v.copy()
    diag[:-1] += hop
    diag[1:] += hop
    energy, vec = eigh_tridiagonal(diag, -hop, select="i", select_range=(0, 0))
    energy = float(energy[0])
    barrier = 0.0 if extra is None else float(min(extra[0], extra[-1]))
    if energy >= barrier:
        raise NoBoundState(f"{carrier}: lowest level {energy / MEV:.3f} meV is not bound")
    vec = vec[:, 0]
    vec *= np.sign(vec[np.argmax(np.abs(vec))])
    chi = vec / np.sqrt(dz)
    coulomb = 0.0 if extra is None else float(np.sum(extra * vec**2))
    confinement = energy - coulomb + depth
    penetration = sc.hbar / np.sqrt(2 * m_barrier * sc.m_e * (barrier - energy))
    return CarrierEnvelope(z, chi, confinement, energy, penetration, carrier)


def solve_carrier_envelope(
    qw: QWSpec,
    carrier: str,
    extra_potential: np.ndarray | None = None,
    z: np.ndarray | None = None,
    step: float = 0.05e-9,
) -> CarrierEnvelope:
    """Ground state of the finite well with BenDaniel-Duke mass matching.

    Without an explicit grid the domain is widened until it extends at least
    ten penetration depths beyond each well edge. ``extra_potential`` (J) must
    be sampled on ``z``.
    """
    if carrier not in CARRIERS:
        raise ValueError(f"carrier must be one of {CARRIERS}")
    if extra_potential is not None:
        if z is None or len(z) != len(extra_potential):
            raise GridMismatch("extra_potential must be sampled on the supplied grid")
        return _solve_on_grid(qw, carrier, z, np.asarray(extra_potential, float))
    if z is not None:
        return _solve_on_grid(qw, carrier, z, None)
    half_width = qw.thickness / 2 + 40e-9
    while True:
        grid = envelope_grid(qw, half_width, step)
        env = _solve_on_grid(qw, carrier, grid, None)
        needed = qw.thickness / 2 + 10 * env.penetration_depth
        if needed <= half_width:
            return env
        half_width = 1.2 * needed


def common_grid(qw: QWSpec, step: float = 0.05e-9) -> np.ndarray:
    """Grid wide enough for both carriers."""
    depth = max(solve_carrier_envelope(qw, c, step=step).penetration_depth for c in CARRIERS)
    return envelope_grid(qw, qw.thickness / 2 + 10 * depth, step)


@dataclass(frozen=True)
class PseudoPotential:
    """Coulomb attraction averaged over both growth-axis envelopes.

    The distribution of the electron-hole separation along z is kept as a
    piecewise-linear density, and the kernel 1/sqrt(rho^2 + u^2) is integrated
    against it analytically, so small rho is handled without a cutoff.
    """

    u: np.ndarray
    density: np.ndarray
    dielectric_constant: float

    @classmethod
    def from_profile(cls, u, density, dielectric_constant):
        return cls(np.asarray(u, float), np.asarray(density, float), float(dielectric_constant))

    def __call__(self, rho) -> np.ndarray:
        rho = np.atleast_1d(np.asarray(rho, float))
        u0, u1 = self.u[:-1], self.u[1:]
        p0 = self.density[:-1]
        slope = (self.density[1:] - p0) / (u1 - u0)
        out = np.empty_like(rho)
        for start in range(0, rho.size, 128):
            r = rho[start:start + 128, None]
            a, b = u1 / r, u0 / r
            # cancellation-free differences of asinh and sqrt
            asinh = np.arcsinh(a * np.sqrt(1 + b * b) - b * np.sqrt(1 + a * a))
            root = (u1 - u0) * (u1 + u0) / (np.hypot(r, u1) + np.hypot(r, u0))
            out[start:start + 128] = np.sum((p0 - slope * u0) * asinh + slope * root, axis=1)
        return -COULOMB / self.dielectric_constant * out


def pseudo_potential(chi_e: CarrierEnvelope, chi_h: CarrierEnvelope, dielectric_constant: float) -> PseudoPotential:
    if chi_e.z.shape != chi_h.z.shape or not np.allclose(chi_e.z, chi_h.z, rtol=0, atol=1e-15):
        raise GridMismatch("electron and hole envelopes must share one grid")
    dz = chi_e.step
    n = chi_e.z.size
    density = np.convolve(chi_e.chi**2, chi_h.chi[::-1] ** 2) * dz
    u = (np.arange(density.size) - (n - 1)) * dz
    keep = np.nonzero(density > 1e-14 * density.max())[0]
    lo, hi = max(keep[0] - 1, 0), min(keep[-1] + 2, density.size)
    return PseudoPotential.from_profile(u[lo:hi], density[lo:hi], dielectric_constant)


@dataclass(frozen=True)
class RadialExciton:
    rho: np.ndarray
    phi: np.ndarray  # 2*pi * int phi^2 rho drho = 1
    binding_energy: float

    @property
    def phi0_squared(self) -> float:
        return float(self.phi[0] ** 2)

    @property
    def bohr_radius(self) -> float:
        """Ratio of first moments of phi, int rho phi drho / int phi drho."""
        x = np.log(self.rho)
        return float(np.trapezoid(self.rho**2 * self.phi, x) / np.trapezoid(self.rho * self.phi, x))

    @property
    def mean_radius(self) -> float:
        """Expectation value of rho."""
        x = np.log(self.rho)
        return float(2 * np.pi * np.trapezoid(self.rho**3 * self.phi**2, x))


def radial_grid(rho_min: float = 1e-12, rho_max: float = 100e-9, n_points: int = 2000) -> np.ndarray:
    return np.geomspace(rho_min, rho_max, n_points)


def solve_radial_exciton(potential, reduced_mass: float, rho: np.ndarray | None = None) -> RadialExciton:
    """Lowest s-state of the 2D radial problem in ``potential`` (J).

    On x = ln(rho) the radial Laplacian becomes exp(-2x) d^2/dx^2, which
    gives a symmetric tridiagonal problem after rescaling by rho. The inner
    boundary is a zero-flux condition, the outer one a hard wall.
    """
    rho = radial_grid() if rho is None else np.asarray(rho, float)
    x = np.log(rho)
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h, rtol=1e-8):
        raise GridMismatch("radial grid must be logarithmically uniform")
    v = potential(rho) if callable(potential) else np.asarray(potential, float)
    kin = sc.hbar**2 / (2 * reduced_mass * sc.m_e * h * h)
    diag = np.full(rho.size, 2 * kin)
    diag[0] = kin
    inv = 1 / rho
    d = diag * inv**2 + v
    off = -kin * inv[:-1] * inv[1:]
    energy, vec = eigh_tridiagonal(d, off, select="i", select_range=(0, 0))
    energy = float(energy[0])
    if energy >= 0:
        raise NoBoundState("no bound exciton level on the radial grid")
    phi = vec[:, 0] * inv
    phi /= np.sqrt(2 * np.pi * np.trapezoid(phi**2 * rho**2, x))
    phi *= np.sign(phi[0])
    return RadialExciton(rho, phi, energy)


def hartree_potentials(radial: RadialExciton, chi_e: CarrierEnvelope, chi_h: CarrierEnvelope, dielectric_constant: float):
    """Mean Coulomb potential felt by each carrier from its partner."""
    z = chi_e.z
    dz = chi_e.step
    n = z.size
    x = np.log(radial.rho)
    weight = 2 * np.pi * radial.rho**2 * radial.phi**2
    sep = np.arange(n) * dz
    kernel = np.array([np.trapezoid(weight / np.hypot(radial.rho, s), x) for s in sep])
    w_full = np.concatenate([kernel[:0:-1], kernel])
    scale = -COULOMB / dielectric_constant * dz
    on_e = scale * np.convolve(chi_h.chi**2, w_full, mode="valid")
    on_h = scale * np.convolve(chi_e.chi**2, w_full, mode="valid")
    return on_e, on_h


@dataclass(frozen=True)
class ExcitonState:
    rho: np.ndarray
    phi: np.ndarray
    binding_energy: float
    bohr_radius: float
    radiative_halfwidth: float
    transition_energy: float
    oscillator_strength: float  # per unit area, m^-2
    electron: CarrierEnvelope
    hole: CarrierEnvelope
    potential: PseudoPotential
    reduced_mass: float
    overlap: float
    iterations: int
    history: tuple[float, ...]

    @property
    def radial(self) -> RadialExciton:
        return RadialExciton(self.rho, self.phi, self.binding_energy)


def oscillator_strength_per_area(kane_energy: float, photon_energy: float, overlap: float, phi0_squared: float) -> float:
    """f/S of the bright heavy-hole exciton doublet, in m^-2.

    Uses |e.r_cv|^2 = hbar^2 E_P / (2 m0 (hbar w)^2) so that
    f/S = (E_P / hbar w) |<chi_e|chi_h>|^2 |phi(0)|^2.
    """
    return kane_energy / photon_energy * overlap**2 * phi0_squared


def radiative_halfwidth(oscillator_strength: float, refractive_index: float) -> float:
    """Radiative half-linewidth hbar*Gamma_x in joules."""
    return _RADIATIVE_PREFACTOR / refractive_index * oscillator_strength


def _assemble(qw, chi_e, chi_h, radial, potential, iterations, history) -> ExcitonState:
    well = qw.well
    overlap = float(np.sum(chi_e.chi * chi_h.chi) * chi_e.step)
    e_x = well.bandgap + chi_e.confinement_energy + chi_h.confinement_energy + radial.binding_energy
    f_s = oscillator_strength_per_area(qw.host.kane_energy, e_x, overlap, radial.phi0_squared)
    return ExcitonState(
        rho=radial.rho,
        phi=radial.phi,
        binding_energy=radial.binding_energy,
        bohr_radius=radial.bohr_radius,
        radiative_halfwidth=radiative_halfwidth(f_s, qw.host.refractive_index),
        transition_energy=e_x,
        oscillator_strength=f_s,
        electron=chi_e,
        hole=chi_h,
        potential=potential,
        reduced_mass=qw.reduced_mass,
        overlap=overlap,
        iterations=iterations,
        history=tuple(history),
    )


def self_consistent_exciton(
    qw: QWSpec,
    tol: float = 0.01 * MEV,
    max_iter: int = 50,
    step: float = 0.05e-9,
    rho: np.ndarray | None = None,
) -> ExcitonState:
    """Iterate envelopes -> pseudo-potential -> radial state -> envelopes.

    The first pass (no Coulomb term along z) is the bootstrap. Each further
    pass adds the Hartree potential of the partner carrier. Stops once two
    successive binding energies differ by less than ``tol`` (J).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    eps = qw.well.dielectric_constant
    mu = qw.reduced_mass
    z = common_grid(qw, step)
    chi_e = solve_carrier_envelope(qw, "electron", z=z)
    chi_h = solve_carrier_envelope(qw, "heavy-hole", z=z)
    potential = pseudo_potential(chi_e, chi_h, eps)
    radial = solve_radial_exciton(potential, mu, rho)
    history = [radial.binding_energy]
    for iteration in range(1, max_iter + 1):
        on_e, on_h = hartree_potentials(radial, chi_e, chi_h, eps)
        chi_e = solve_carrier_envelope(qw, "electron", on_e, z=z)
        chi_h = solve_carrier_envelope(qw, "heavy-hole", on_h, z=z)
        potential = pseudo_potential(chi_e, chi_h, eps)
        radial = solve_radial_exciton(potential, mu, rho)
        history.append(radial.binding_energy)
        if abs(history[-1] - history[-2]) < tol:
            return _assemble(qw, chi_e, chi_h, radial, potential, iteration, history)
    raise NotConverged(f"binding energy not converged after {max_iter} iterations: {history[-3:]}")


def coulomb_potential(dielectric_constant: float):
    """Bare 2D Coulomb attraction, for limits and tests."""
    return lambda rho: -COULOMB / (dielectric_constant * np.asarray(rho, float))


def effective_rydberg(reduced_mass: float, dielectric_constant: float) -> float:
    return reduced_mass * sc.m_e * COULOMB**2 / (2 * sc.hbar**2 * dielectric_constant**2)


def effective_bohr_radius(reduced_mass: float, dielectric_constant: float) -> float:
    return sc.hbar**2 * dielectric_constant / (reduced_mass * sc.m_e * COULOMB)
