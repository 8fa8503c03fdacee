"""Optical and mechanical modes of thin microdisks and microrings.

Optical modes are TE whispering-gallery modes with a perfectly reflecting
outer (and inner) wall, times the fundamental even profile of the slab.
Mechanical modes are plane-stress in-plane modes: radial breathing modes for
the disk and their ring generalization built from cylinder functions of
order nu_m.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import constants as sc
from scipy.optimize import brentq
from scipy.special import j0, jn_zeros, jv, jvp, y0, yv, yvp

from .errors import NoGuidedMode, OutOfRange, RootNotBracketed
from .materials import MaterialParams

DEFAULT_WAVELENGTH = 850e-9


def plane_stress_factor(poisson_ratio: float) -> float:
    """Volume-strain reduction (1 - 2 nu)/(1 - nu) of a free thin plate."""
    return (1 - 2 * poisson_ratio) / (1 - poisson_ratio)


def zero_point_amplitude(mass: float, omega: float) -> float:
    return np.sqrt(sc.hbar / (2 * mass * omega))


def _find_roots(func, start: float, step: float, count: int, stop: float) -> list[float]:
    """First ``count`` sign changes of ``func`` on [start, stop], refined by brentq."""
    roots: list[float] = []
    a, fa = start, func(start)
    while len(roots) < count:
        b = a + step
        if b > stop:
            raise RootNotBracketed(f"found {len(roots)} of {count} roots below {stop:.4g}")
        fb = func(b)
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(func, a, b, xtol=1e-15 * b, rtol=1e-15))
        a, fa = b, fb
    return roots


def _cylinder_norm(order: float, k: float, mix: float, r0: float, r1: float) -> float:
    """int_{r0}^{r1} C(kr)^2 r dr for C = J_order + mix Y_order (Lommel)."""

    def prim(r):
        if r == 0.0:
            return 0.0
        x = k * r
        c = jv(order, x) + mix * yv(order, x)
        dc = jvp(order, x) + mix * yvp(order, x)
        return 0.5 * r * r * (dc * dc + (1 - order * order / (x * x)) * c * c)

    return prim(r1) - prim(r0)


# ---------------------------------------------------------------- geometry


@dataclass(frozen=True)
class PlanarGeometry:
    """Disk (inner_radius = 0) or ring of thickness ``thickness``."""

    outer_radius: float
    thickness: float
    material: MaterialParams
    inner_radius: float = 0.0
    qw_positions: tuple[float, ...] = (0.0,)
    wavelength: float = DEFAULT_WAVELENGTH

    def __post_init__(self):
        if not 0.0 <= self.inner_radius < self.outer_radius:
            raise OutOfRange("need 0 <= inner_radius < outer_radius")
        if not self.thickness > 0:
            raise OutOfRange("thickness must be positive")
        object.__setattr__(self, "qw_positions", tuple(float(z) for z in self.qw_positions))
        for z in self.qw_positions:
            if abs(z) > self.thickness / 2:
                raise OutOfRange(f"QW at z = {z} lies outside the slab")

    @property
    def is_ring(self) -> bool:
        return self.inner_radius > 0

    @property
    def area(self) -> float:
        return np.pi * (self.outer_radius**2 - self.inner_radius**2)

    @property
    def volume(self) -> float:
        return self.area * self.thickness

    @property
    def mass(self) -> float:
        return self.material.density * self.volume


DiskGeometry = RingGeometry = PlanarGeometry


# ------------------------------------------------------------------ slab


@dataclass(frozen=True)
class SlabMode:
    """Fundamental even TE mode of a symmetric slab in air, int f^2 dz = 1."""

    thickness: float
    index: float
    wavelength: float
    effective_index: float
    kz: float
    decay: float
    amplitude: float

    def profile(self, z) -> np.ndarray:
        z = np.abs(np.asarray(z, float))
        half = self.thickness / 2
        inside = self.amplitude * np.cos(self.kz * np.minimum(z, half))
        outside = self.amplitude * np.cos(self.kz * half) * np.exp(-self.decay * (z - half))
        return np.where(z <= half, inside, outside)

    def effective_length(self, z_qw: float = 0.0) -> float:
        return 2.0 / float(self.profile(z_qw)) ** 2


def slab_effective_index(thickness: float, index: float, wavelength: float = DEFAULT_WAVELENGTH) -> SlabMode:
    """Symmetric-slab TE0 mode from u tan u = sqrt(V^2 - u^2), u = kz L/2."""
    if not index > 1:
        raise OutOfRange("slab index must exceed 1")
    if not thickness > 0:
        raise OutOfRange("slab thickness must be positive")
    k0 = 2 * np.pi / wavelength
    half = thickness / 2
    v = k0 * half * np.sqrt(index**2 - 1)
    if v < 1e-9:
        raise NoGuidedMode(f"normalized frequency {v:.3g} too small to resolve the guided mode")
    u = brentq(lambda u: u * np.tan(u) - np.sqrt(v * v - u * u), 0.0, min(v, np.pi / 2 * (1 - 1e-15)), xtol=1e-15)
    kz = u / half
    decay = np.sqrt(v * v - u * u) / half
    n_eff = np.sqrt(index**2 - (kz / k0) ** 2)
    norm = half + np.sin(2 * u) / (2 * kz) + np.cos(u) ** 2 / decay
    return SlabMode(thickness, index, wavelength, n_eff, kz, decay, 1 / np.sqrt(norm))


# --------------------------------------------------------------- optics


@dataclass(frozen=True)
class OpticalModeWGM:
    p: int
    l: int
    k: float
    omega: float
    normalization: float
    ring_mix: float
    slab: SlabMode
    geometry: PlanarGeometry = field(repr=False)

    @property
    def effective_index(self) -> float:
        return self.slab.effective_index

    @property
    def size_parameter(self) -> float:
        return self.k * self.geometry.outer_radius

    def radial(self, r) -> np.ndarray:
        """F(r) with 2 pi int F^2 r dr = 1 over the resonator."""
        r = np.asarray(r, float)
        c = jv(self.l, self.k * r)
        if self.ring_mix:
            c = c + self.ring_mix * yv(self.l, self.k * r)
        return self.normalization * c

    def intensity(self, r) -> np.ndarray:
        """In-plane |F|^2, azimuthally averaged (standing or travelling wave alike)."""
        return self.radial(r) ** 2


def wgm_mode(
    geometry: PlanarGeometry, p: int, l: int, scan_step: float = np.pi / 16, x_max: float | None = None
) -> OpticalModeWGM:
    """TE WGM of radial order ``p`` and azimuthal order ``l``.

    Disks use the Bessel zero alpha_{l,p}; rings use the p-th root of
    Y_l(k Ri) J_l(k Rd) - J_l(k Ri) Y_l(k Rd), scanned in k Rd up to
    ``x_max`` (default: wide enough for any p).
    """
    if p < 1 or l < 0:
        raise OutOfRange("need p >= 1 and l >= 0")
    slab = slab_effective_index(geometry.thickness, geometry.material.refractive_index, geometry.wavelength)
    rd, ri = geometry.outer_radius, geometry.inner_radius
    if geometry.is_ring:
        q = ri / rd

        def cross(x):
            a = x * q
            ja, ya = jv(l, a), yv(l, a)
            return (ya * jv(l, x) - ja * yv(l, x)) / np.hypot(ja, ya)

        start = max(float(l), 1e-3)
        stop = start + 4 * np.pi * p / (1 - q) + 50 if x_max is None else x_max
        x = _find_roots(cross, start, scan_step, p, stop)[p - 1]
        k = x / rd
        mix = -jv(l, k * ri) / yv(l, k * ri)
    else:
        k = float(jn_zeros(l, p)[-1]) / rd
        if x_max is not None and k * rd > x_max:
            raise RootNotBracketed(f"alpha_({l},{p}) = {k * rd:.4g} beyond search window {x_max}")
        mix = 0.0
    norm = 1 / np.sqrt(2 * np.pi * _cylinder_norm(l, k, mix, ri, rd))
    omega = sc.c * k / slab.effective_index
    return OpticalModeWGM(p, l, k, omega, norm, mix, slab, geometry)


# ------------------------------------------------------------- mechanics


@dataclass(frozen=True)
class MechModePlanar:
    """In-plane mode with radial displacement N C_nu(K r) cos(m theta).

    N is fixed by int |u_r|^2 dA = A (so the volume integral equals V).
    """

    n: int
    m: int
    K: float
    omega: float
    order: float
    mix: float
    normalization: float
    mass: float
    x_zpf: float
    geometry: PlanarGeometry = field(repr=False)

    @property
    def frequency(self) -> float:
        return self.omega / (2 * np.pi)

    def _c(self, x):
        c = jv(self.order, x)
        return c + self.mix * yv(self.order, x) if self.mix else c

    def _dc(self, x):
        d = jvp(self.order, x)
        return d + self.mix * yvp(self.order, x) if self.mix else d

    def displacement(self, r) -> np.ndarray:
        return self.normalization * self._c(self.K * np.asarray(r, float))

    def divergence(self, r) -> np.ndarray:
        """(1/r) d(r u_r)/dr."""
        x = self.K * np.asarray(r, float)
        if self.order == 1.0:
            # C1' + C1/x = C0 for both Bessel kinds
            c0 = j0(x) + self.mix * y0(x) if self.mix else j0(x)
            return self.normalization * self.K * c0
        return self.normalization * self.K * (self._dc(x) + self._c(x) / x)

    def radial_stress(self, r) -> np.ndarray:
        """Plane-stress sigma_rr of the radial field, per unit amplitude."""
        mat = self.geometry.material
        r = np.asarray(r, float)
        x = self.K * r
        du = self.normalization * self.K * self._dc(x)
        u = self.normalization * self._c(x)
        return mat.young_modulus / (1 - mat.poisson_ratio**2) * (du + mat.poisson_ratio * u / r)


def rbm_disk(geometry: PlanarGeometry, n: int) -> MechModePlanar:
    """n-th radial breathing mode: x J0(x) - (1 - nu) J1(x) = 0, x = K Rd."""
    if n < 1:
        raise OutOfRange("n must be >= 1")
    mat = geometry.material
    nu = mat.poisson_ratio
    f = lambda x: x * jv(0, x) - (1 - nu) * jv(1, x)
    x = _find_roots(f, 1e-6, np.pi / 4, n, 4 * n + 20)[n - 1]
    return _assemble_mech(geometry, n, 0, x / geometry.outer_radius, 1.0, 0.0)


def mech_order(m: int, poisson_ratio: float) -> float:
    gamma = np.sqrt(2 / (1 - poisson_ratio))
    return np.sqrt(1 + (m / gamma) ** 2)


def mech_ring(geometry: PlanarGeometry, n: int, m: int = 0, robin: str = "poisson", scan_step: float = np.pi / 16) -> MechModePlanar:
    """n-th in-plane ring mode of azimuthal order m.

    Free edges impose D C(K R) = 0 at both radii with D = d/dr + c/r. With
    ``robin="poisson"`` c is the Poisson ratio (traction-free sigma_rr);
    ``robin="order"`` uses the Bessel order nu_m instead and is kept only to
    show that it misses the disk limit. For narrow rings n = 1 is the
    extensional hoop mode and n >= 2 are the radial pinching modes.
    """
    if not geometry.is_ring:
        raise OutOfRange("mech_ring needs inner_radius > 0; use rbm_disk for disks")
    if n < 1 or m < 0:
        raise OutOfRange("need n >= 1 and m >= 0")
    nu = geometry.material.poisson_ratio
    order = mech_order(m, nu)
    coef = {"poisson": nu, "order": order}[robin]
    rd, ri = geometry.outer_radius, geometry.inner_radius
    q = ri / rd

    def dj(x):
        return jvp(order, x) + coef * jv(order, x) / x

    def dy(x):
        return yvp(order, x) + coef * yv(order, x) / x

    def cross(x):
        a = x * q
        ja, ya = dj(a), dy(a)
        return (ya * dj(x) - ja * dy(x)) / np.hypot(ja, ya)

    x = _find_roots(cross, 1e-3, scan_step, n, 4 * np.pi * n / (1 - q) + 50)[n - 1]
    k = x / rd
    mix = -dj(k * ri) / dy(k * ri)
    return _assemble_mech(geometry, n, m, k, order, mix)


def _assemble_mech(geometry, n, m, k, order, mix) -> MechModePlanar:
    mat = geometry.material
    ri, rd = geometry.inner_radius, geometry.outer_radius
    integral = _cylinder_norm(order, k, mix, ri, rd)
    norm = np.sqrt((rd**2 - ri**2) / (2 * integral))
    omega = mat.plane_stress_sound_speed * k
    mass = geometry.mass
    return MechModePlanar(n, m, k, omega, order, mix, norm, mass, zero_point_amplitude(mass, omega), geometry)


def ring_spectrum(geometry: PlanarGeometry, inner_radii, n_modes: int = 4, m: int = 0) -> np.ndarray:
    """Mode frequencies (Hz) versus inner radius; rows follow ``inner_radii``."""
    out = np.empty((len(inner_radii), n_modes))
    for i, ri in enumerate(inner_radii):
        g = PlanarGeometry(geometry.outer_radius, geometry.thickness, geometry.material, ri, geometry.qw_positions, geometry.wavelength)
        out[i] = [mech_ring(g, n, m).frequency for n in range(1, n_modes + 1)]
    return out


# ---------------------------------------------------------------- strain


@dataclass(frozen=True)
class StrainField:
    """Volume strain per unit mode amplitude on a polar grid, 1/m."""

    r: np.ndarray
    theta: np.ndarray
    sigma: np.ndarray  # shape (len(r), len(theta))
    plane_stress_factor: float
    x_zpf: float

    @property
    def zpf_strain(self) -> np.ndarray:
        return self.sigma * self.x_zpf


def plane_stress_strain(mode: MechModePlanar, n_r: int = 512, n_theta: int = 256) -> StrainField:
    g = mode.geometry
    r0 = g.inner_radius if g.is_ring else g.outer_radius * 1e-6
    r = np.linspace(r0, g.outer_radius, n_r)
    theta = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
    factor = plane_stress_factor(g.material.poisson_ratio)
    sigma = factor * np.outer(mode.divergence(r), np.cos(mode.m * theta))
    return StrainField(r, theta, sigma, factor, mode.x_zpf)
