"""Linearized fluctuations about a driven steady state: squeezing, back-action, spectra, occupation.

Rates are angular frequencies (rad/s), displacement is in units of x_ZPF, so the
effective mass is m~ = 1/(2 Omega) and hbar = 1. Temperatures are in kelvin.
Fourier convention: f(omega) = int dt exp(i omega t) f(t).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants as sc
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq, minimize_scalar

from .dynamics import DriveConfig, SteadyState, analyze_matrix, linear_matrix
from .errors import OutOfRange, QuadratureNotConverged, ResidueInvalid, SingularResolvent, SqueezeDiverges, UnstablePoint


@dataclass(frozen=True)
class OperatingPoint:
    """Linearization point: effective detuning and polariton number plus the model rates."""

    detuning: float  # delta~, rad/s
    n: float
    kappa: float
    omega: float
    gamma: float
    g: float
    chi: float

    def __post_init__(self):
        if not (self.kappa > 0 and self.omega > 0 and self.gamma > 0):
            raise OutOfRange("kappa, Omega and Gamma must be positive")
        if self.n < 0:
            raise OutOfRange("polariton number must be non-negative")

    @property
    def mass(self) -> float:
        return 0.5 / self.omega

    def with_(self, **kw) -> "OperatingPoint":
        return replace(self, **kw)

    def matrix(self) -> np.ndarray:
        a = np.sqrt(self.n)
        return linear_matrix(a, self.detuning, self.kappa, self.omega, self.gamma, self.g, self.chi)

    def stability(self):
        return analyze_matrix(self.matrix(), self.kappa)


def from_steady_state(cfg: DriveConfig, ss: SteadyState) -> OperatingPoint:
    return OperatingPoint(ss.effective_detuning, ss.n, cfg.kappa, cfg.omega, cfg.gamma, cfg.g, cfg.chi)


@dataclass(frozen=True)
class SqueezedFrame:
    r: float
    delta_s: float
    g_s: float
    n_s: float
    m_s: float  # signed squeezed-bath correlation <xi_s xi_s> / (kappa n)

    @property
    def correlation(self) -> np.ndarray:
        """Bath correlation matrix C_s / (kappa n)."""
        return np.array([[self.m_s, self.n_s + 1], [self.n_s, self.m_s]])


@dataclass(frozen=True)
class BackActionResult:
    delta_omega: np.ndarray  # frequency shift at each requested omega, rad/s
    delta_gamma: np.ndarray  # optical damping at each requested omega, rad/s
    gamma_opt: float  # delta_gamma at omega = Omega
    delta_sb: tuple[float, float]  # squeezed-frame sideband detunings delta_{s,-}, delta_{s,+}
    detuning_sb: tuple[float, float]  # effective detunings delta~_-, delta~_+ of the sidebands
    eta: tuple[float, float]  # sideband enhancement eta_-, eta_+
    g_tilde_sq: float  # n g_s^2 / (2 m~ Omega)


@dataclass(frozen=True)
class SpectrumResult:
    omega: np.ndarray
    s_qq: np.ndarray  # x_ZPF^2 s
    provenance: str  # "squeezed-analytic" or "exact-qle"


@dataclass(frozen=True)
class OccupationResult:
    n_eff: float
    n_th: float
    method: str


@dataclass(frozen=True)
class PhonoritonModes:
    omega_pn: tuple[complex, complex]
    splitting: complex  # 2 sqrt(n g^2 eta_- - kappa^2/16), real when the modes anticross


# ----------------------------------------------------------- squeezing


def squeeze_frame(chi: float, n: float, detuning: float, g: float) -> SqueezedFrame:
    """Bogolyubov frame that diagonalizes the Kerr-coupled fluctuations.

    r = artanh(-chi n / delta~)/2, delta_s = delta~ cosh 2r + chi n sinh 2r, g_s = g exp(-r).
    """
    if detuning == 0 or abs(chi * n / detuning) >= 1:
        raise SqueezeDiverges(f"|chi n / delta~| = {abs(chi * n / detuning) if detuning else np.inf:.3g} >= 1")
    r = 0.5 * np.arctanh(-chi * n / detuning)
    delta_s = detuning * np.cosh(2 * r) + chi * n * np.sinh(2 * r)
    return SqueezedFrame(float(r), float(delta_s), float(g * np.exp(-r)), float(np.sinh(r) ** 2), float(-np.sinh(r) * np.cosh(r)))


def thermal_occupation(omega, temperature: float):
    """Bose-Einstein occupation at angular frequency omega (rad/s)."""
    omega = np.asarray(omega, float)
    if temperature < 0:
        raise OutOfRange("temperature must be non-negative")
    if temperature == 0:
        return np.zeros_like(omega)
    return 1 / np.expm1(sc.hbar * omega / (sc.k * temperature))


def _coth_half(omega, temperature: float):
    """coth(hbar omega / 2 k_B T), analytic in complex omega; sign(Re omega) at T = 0."""
    omega = np.asarray(omega)
    if temperature == 0:
        return np.sign(omega.real)
    return 1 / np.tanh(sc.hbar * omega / (2 * sc.k * temperature))


# ---------------------------------------------------------- back-action


def sideband_detunings(kappa: float, omega: float) -> tuple[float, float]:
    """Extrema of the optical damping at omega = Omega in the squeezed frame (delta_{s,-}, delta_{s,+})."""
    d = np.sqrt(4 * omega**2 - kappa**2 + 2 * np.sqrt(kappa**4 + 4 * kappa**2 * omega**2 + 16 * omega**4)) / (2 * np.sqrt(3))
    return -float(d), float(d)


def enhancement(point: OperatingPoint) -> tuple[tuple[float, float], tuple[float, float], tuple[float, float]]:
    """(delta_{s,-+}, delta~_-+, eta_-+) for the sidebands of ``point``."""
    ds = sideband_detunings(point.kappa, point.omega)
    cn = point.chi * point.n
    dt = tuple(float(np.sign(d) * np.hypot(d, cn)) for d in ds)
    ratio = [1 + cn / d for d in dt]
    eta = (float(np.sqrt(ratio[0] / ratio[1])), float(np.sqrt(ratio[1] / ratio[0])))
    return ds, dt, eta


def _self_energy(point: OperatingPoint, frame: SqueezedFrame, omega):
    omega = np.asarray(omega, complex)
    xs = 1 / (-frame.delta_s - 0.5j * point.kappa - omega)
    xs_c = 1 / (-frame.delta_s + 0.5j * point.kappa + omega)  # conj(Xi_s(-omega)) continued analytically
    return frame.g_s**2 * point.n * (xs + xs_c)


def backaction_rates(point: OperatingPoint, omega=None) -> BackActionResult:
    """Optical spring and damping from the squeezed-frame self-energy.

    Sigma = n g_s^2 [Xi_s(omega) + Xi_s*(-omega)]; delta_Omega = -Re Sigma / (2 m~ omega),
    delta_Gamma = Im Sigma / (m~ omega).
    """
    frame = squeeze_frame(point.chi, point.n, point.detuning, point.g)
    w = np.atleast_1d(np.asarray(point.omega if omega is None else omega, float))
    sig = _self_energy(point, frame, w)
    d_omega = -sig.real / (2 * point.mass * w)
    d_gamma = sig.imag / (point.mass * w)
    sig0 = _self_energy(point, frame, point.omega)
    ds, dt, eta = enhancement(point)
    return BackActionResult(
        d_omega,
        d_gamma,
        float(sig0.imag / (point.mass * point.omega)),
        ds,
        dt,
        eta,
        float(point.n * frame.g_s**2 / (2 * point.mass * point.omega)),
    )


def self_energy_qle(point: OperatingPoint, omega) -> np.ndarray:
    """Mechanical self-energy from the unsqueezed Kerr resolvent.

    Sigma = g^2 n (1, 1) K(omega)^-1 (1, 1)^T with
    K = [[-d - i k/2 - w, chi n], [chi n, -d + i k/2 + w]]; no squeezing step.
    """
    w = np.atleast_1d(np.asarray(omega, complex))
    d, k, cn = point.detuning, point.kappa, point.chi * point.n
    a = -d - 0.5j * k - w
    b = -d + 0.5j * k + w
    det = a * b - cn * cn
    if np.any(det == 0):
        raise SingularResolvent("Kerr resolvent is singular")
    return point.g**2 * point.n * (a + b - 2 * cn) / det


def optical_damping_qle(point: OperatingPoint) -> float:
    """Gamma_opt = Im Sigma(Omega) / (m~ Omega) from the unsqueezed self-energy."""
    return float(self_energy_qle(point, point.omega)[0].imag / (point.mass * point.omega))


def optical_damping_exact(point: OperatingPoint) -> float:
    """Gamma_opt from the mechanical eigenvalue of the full linear problem: -2 Im(omega_m) - Gamma."""
    w = point.stability().eigenvalues
    mech = w[np.argmin(np.abs(w - point.omega))]
    return float(-2 * mech.imag - point.gamma)


# --------------------------------------------------------------- spectra


def _require_stable(point: OperatingPoint):
    rep = point.stability()
    if not rep.stable:
        raise UnstablePoint(f"growth rate {rep.eigenvalues.imag.max():.3g} rad/s")
    return rep


def _psd_squeezed(point: OperatingPoint, frame: SqueezedFrame, temperature: float, w):
    w = np.asarray(w, float)
    m = point.mass
    xm_inv = m * (point.omega**2 - w**2 - 1j * w * point.gamma)
    xs_p = 1 / (-frame.delta_s - 0.5j * point.kappa - w)
    xs_m = 1 / (-frame.delta_s - 0.5j * point.kappa + w)
    eff = 1 / (xm_inv - _self_energy(point, frame, w))
    with np.errstate(invalid="ignore", divide="ignore"):
        thermal = np.where(w == 0, 2 * m * point.gamma * sc.k * temperature / sc.hbar, m * w * point.gamma * _coth_half(w, temperature))
    optical = point.kappa * point.n * frame.g_s**2 * ((frame.n_s + 0.5) * (abs(xs_p) ** 2 + abs(xs_m) ** 2) + 2 * frame.m_s * (xs_p * xs_m).real)
    return abs(eff) ** 2 * (thermal + optical)


def displacement_psd(point: OperatingPoint, temperature: float, omega) -> SpectrumResult:
    """Symmetrized displacement spectrum from the squeezed-frame closed form."""
    if temperature < 0:
        raise OutOfRange("temperature must be non-negative")
    _require_stable(point)
    frame = squeeze_frame(point.chi, point.n, point.detuning, point.g)
    w = np.asarray(omega, float)
    return SpectrumResult(w, _psd_squeezed(point, frame, temperature, w), "squeezed-analytic")


def _transfer(point: OperatingPoint, w: float) -> np.ndarray:
    """Row of the resolvent mapping noise (alpha* xi, alpha xi^dag, xi_m) to dq at frequency w."""
    d, k, cn, gn = point.detuning, point.kappa, point.chi * point.n, point.g * point.n
    a = np.array(
        [
            [-d - 0.5j * k - w, cn, -gn],
            [cn, -d + 0.5j * k + w, -gn],
            [-point.g, -point.g, point.mass * (point.omega**2 - w * w - 1j * w * point.gamma)],
        ],
        dtype=complex,
    )
    if np.linalg.cond(a) > 1e14:
        raise SingularResolvent(f"resolvent singular at omega = {w:.6g}")
    inv = np.linalg.inv(a)
    return np.array([-inv[2, 0], -inv[2, 1], inv[2, 2]])


def _psd_exact(point: OperatingPoint, temperature: float, w: float) -> float:
    tp, tm = _transfer(point, w), _transfer(point, -w)
    m, kn = point.mass, point.kappa * point.n

    def diff(x):
        # <N_j(x) N_k(-x)> / 2 pi
        out = np.zeros((3, 3))
        out[0, 1] = kn
        if x == 0:
            out[2, 2] = 2 * m * point.gamma * sc.k * temperature / sc.hbar
        else:
            out[2, 2] = 2 * m * x * point.gamma * (thermal_occupation(x, temperature) + 1) if x > 0 else 2 * m * abs(x) * point.gamma * thermal_occupation(abs(x), temperature)
        return out

    dp, dm = diff(w), diff(-w)
    total = 0.5 * np.einsum("j,k,jk->", tp, tm, dp + dm.T)
    return float(total.real)


def exact_qle_spectrum(point: OperatingPoint, temperature: float, omega) -> SpectrumResult:
    """Symmetrized displacement spectrum from a direct 3x3 frequency-domain solve, no squeezing step."""
    if temperature < 0:
        raise OutOfRange("temperature must be non-negative")
    _require_stable(point)
    w = np.asarray(omega, float)
    s = np.array([_psd_exact(point, temperature, x) for x in w.ravel()]).reshape(w.shape)
    return SpectrumResult(w, s, "exact-qle")


# ------------------------------------------------------------ occupation


def _energy_quadrature(point: OperatingPoint, psd, cutoff: float, rtol: float) -> float:
    """<H> = int domega/(4 pi) m~ (Omega^2 + omega^2) S(omega), S even, truncated at ``cutoff``."""
    rep = point.stability()
    marks = {0.0, cutoff}
    for ev in rep.eigenvalues:
        c, wdt = abs(ev.real), max(abs(ev.imag), 1e-300)
        for k in (-50, -5, -1, 0, 1, 5, 50):
            x = c + k * wdt
            if 0 < x < cutoff:
                marks.add(x)
    edges = np.array(sorted(marks))
    floor = rtol * point.omega / len(edges)  # <H> >= Omega/2 sets the absolute scale
    total = err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            val, e = quad(lambda x: point.mass * (point.omega**2 + x * x) * psd(x), a, b, epsrel=rtol, epsabs=floor, limit=400)
            total += val
            err += e
    if not err <= 100 * rtol * abs(total) + 2 * np.pi * rtol * point.omega:
        raise QuadratureNotConverged(f"energy integral error {err:.3g} vs value {total:.3g}")
    return 2 * total / (4 * np.pi)


def _default_cutoff(point: OperatingPoint) -> float:
    return 10 * (point.omega + abs(point.detuning) + point.kappa)


def _weak_coupling_poles(point: OperatingPoint, frame: SqueezedFrame):
    ba = backaction_rates(point)
    g_om = point.gamma + ba.gamma_opt
    o_om = point.omega + 2 * float(ba.delta_omega[0])
    if g_om <= 0:
        raise UnstablePoint("net mechanical damping is not positive")
    o = point.omega
    mech = [np.sqrt(o * (o_om + 1j * g_om)), -np.sqrt(o * (o_om - 1j * g_om))]
    opt = [-frame.delta_s + 0.5j * point.kappa, frame.delta_s + 0.5j * point.kappa]
    return mech, opt, o_om, g_om


def _residue_energy(point: OperatingPoint, temperature: float) -> float:
    """Upper-half-plane residues of the weak-coupling integrand.

    |Xi_eff|^2 ~ 1/(m~^2 [(w^2 - Omega Omega_om)^2 + Omega^2 Gamma_om^2]) and the optical
    bracket written as 4 B(w)/A(w) with A = 16 [(w+d)^2 + k^2/4][(w-d)^2 + k^2/4] and
    B = (2 n_s + 1)(k^2 + 4 d^2 + 4 w^2) - 2 m_s (k^2 - 4 d^2 + 4 w^2), m_s signed.
    The thermal coth is evaluated at the shifted mechanical poles.
    """
    frame = squeeze_frame(point.chi, point.n, point.detuning, point.g)
    mech, opt, o_om, g_om = _weak_coupling_poles(point, frame)
    o, k, d, m = point.omega, point.kappa, frame.delta_s, point.mass
    # the mechanical pair p, p* is Gamma_om apart by construction; check the other pairings
    opt_all = opt + [p.conjugate() for p in opt]
    gaps = [abs(a - b) for a in mech for b in opt_all] + [abs(opt[0] - opt[1])]
    if min(gaps) < 10 * g_om:
        raise ResidueInvalid("optical and mechanical poles closer than 10 Gamma_om")
    amp = k * point.n * frame.g_s**2

    def bracket(w):
        b = (2 * frame.n_s + 1) * (k * k + 4 * d * d + 4 * w * w) - 2 * frame.m_s * (k * k - 4 * d * d + 4 * w * w)
        return 4 * b

    def mech_den(w):  # m~^2 [(w^2 - O O_om)^2 + O^2 G_om^2] = m~^2 prod over mech poles
        return m * m * ((w * w - o * o_om) ** 2 + (o * g_om) ** 2)

    def a_poly(w):
        return 16 * ((w + d) ** 2 + k * k / 4) * ((w - d) ** 2 + k * k / 4)

    def pref(w):
        return m * (o * o + w * w) / (4 * np.pi)

    total = 0j
    # mechanical poles: both thermal and optical parts
    for p in mech:
        dden = m * m * 2 * (p * p - o * o_om) * 2 * p  # derivative of mech_den
        thermal = m * p * point.gamma * _coth_half(p, temperature)
        total += pref(p) * (thermal + amp * bracket(p) / a_poly(p)) / dden
    # optical poles: only the optical part is singular there
    for p in opt:
        dd = 16 * (2 * (p + d) * ((p - d) ** 2 + k * k / 4) + 2 * (p - d) * ((p + d) ** 2 + k * k / 4))
        total += pref(p) * amp * bracket(p) / (mech_den(p) * dd)
    return float((2j * np.pi * total).real)


def _residue_energy_exact(point: OperatingPoint, temperature: float) -> float:
    """Upper-half-plane residues of the full squeezed-frame integrand.

    With u = (-d - i k/2 - w)(-d + i k/2 + w), Xi_eff = u/P where
    P = m~ (Omega^2 - w^2 - i w Gamma) u + 2 n g_s^2 d is quartic. The integrand is
    m~ (Omega^2 + w^2)/(4 pi) [u u~ m~ w Gamma coth + kappa n g_s^2 B/4] / (P P~),
    P~(w) = conj(P(conj w)); its upper-half-plane poles are the conjugated roots of P.
    """
    frame = squeeze_frame(point.chi, point.n, point.detuning, point.g)
    o, k, d, m = point.omega, point.kappa, frame.delta_s, point.mass
    P = np.polynomial.Polynomial
    w = P([0, 1])
    u = (-d - 0.5j * k - w) * (-d + 0.5j * k + w)
    u_t = P(np.conj(u.coef))
    poly = m * (o * o - w * w - 1j * point.gamma * w) * u + 2 * point.n * frame.g_s**2 * d
    poly_t = P(np.conj(poly.coef))
    roots = poly_t.roots()
    if np.any(roots.imag <= 0):
        raise UnstablePoint("susceptibility pole on or below the real axis")
    b = (2 * frame.n_s + 1) * (k * k + 4 * d * d + 4 * w * w) - 2 * frame.m_s * (k * k - 4 * d * d + 4 * w * w)
    dpoly_t = poly_t.deriv()
    total = 0j
    for p in roots:
        num = m * (o * o + p * p) / (4 * np.pi) * (u(p) * u_t(p) * m * p * point.gamma * _coth_half(p, temperature) + k * point.n * frame.g_s**2 * b(p) / 4)
        total += num / (poly(p) * dpoly_t(p))
    return float((2j * np.pi * total).real)


def phonon_occupation(point: OperatingPoint, temperature: float, method: str = "quadrature", cutoff: float | None = None, rtol: float = 1e-8) -> OccupationResult:
    """Mean phonon number from the internal energy, n_eff = <H>/Omega - 1/2.

    ``quadrature`` integrates the squeezed-frame spectrum up to ``cutoff`` (default
    10 (Omega + |delta~| + kappa)); the zero-point thermal tail beyond it grows only as
    (Gamma/2 pi) ln(cutoff). ``residues`` sums the poles of the weak-coupling form,
    ``residues-exact`` those of the full squeezed-frame integrand, ``exact-qle``
    integrates the spectrum of the unsqueezed 3x3 solve.
    """
    _require_stable(point)
    n_th = float(thermal_occupation(point.omega, temperature))
    if method == "quadrature":
        frame = squeeze_frame(point.chi, point.n, point.detuning, point.g)
        energy = _energy_quadrature(point, lambda x: _psd_squeezed(point, frame, temperature, x), cutoff or _default_cutoff(point), rtol)
    elif method == "residues":
        energy = _residue_energy(point, temperature)
    elif method == "residues-exact":
        energy = _residue_energy_exact(point, temperature)
    elif method == "exact-qle":
        energy = _energy_quadrature(point, lambda x: _psd_exact(point, temperature, x), cutoff or _default_cutoff(point), rtol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return OccupationResult(energy / point.omega - 0.5, n_th, method)


def _detuning_for(point: OperatingPoint, delta_s: float) -> float:
    """Effective detuning whose squeezed-frame detuning is ``delta_s``."""
    return float(np.sign(delta_s) * np.hypot(delta_s, point.chi * point.n))


def _search_sideband(point: OperatingPoint, objective, sign: int, tol: float):
    """Bounded minimization of ``objective(delta~)`` with delta_s in sign * [0.3, 2] Omega.

    The search runs over delta_s since delta~ crowds against |chi n| when |chi n| >> Omega.
    """
    lo, hi = sorted((sign * 0.3 * point.omega, sign * 2.0 * point.omega))
    res = minimize_scalar(lambda ds: objective(_detuning_for(point, ds)), bounds=(lo, hi), method="bounded", options={"xatol": tol * point.kappa})
    return _detuning_for(point, float(res.x)), float(res.fun)


def optimal_cooling(point: OperatingPoint, temperature: float, method: str = "residues", tol: float = 1e-3) -> tuple[float, OccupationResult]:
    """Minimize n_eff over delta~ on the red side; returns (delta~, occupation)."""

    def f(d):
        try:
            return phonon_occupation(point.with_(detuning=d), temperature, method).n_eff
        except (UnstablePoint, SqueezeDiverges, ResidueInvalid):
            return np.inf

    d, _ = _search_sideband(point, f, -1, tol)
    return d, phonon_occupation(point.with_(detuning=d), temperature, method)


_DAMPING = {
    "squeezed": lambda p: backaction_rates(p).gamma_opt,
    "qle": optical_damping_qle,
    "eigen": optical_damping_exact,
}


def best_amplification(point: OperatingPoint, route: str = "squeezed", tol: float = 1e-4) -> tuple[float, float]:
    """(delta~, Gamma_opt) minimizing Gamma_opt on the blue side.

    ``route`` picks the damping: squeezed-frame closed form, unsqueezed self-energy
    (``qle``) or the mechanical eigenvalue of the full linear problem (``eigen``).
    """
    rate = _DAMPING[route]

    def f(d):
        return rate(point.with_(detuning=d))

    return _search_sideband(point, f, +1, tol)


def best_cooling_rate(point: OperatingPoint, route: str = "squeezed", tol: float = 1e-4) -> tuple[float, float]:
    """(delta~, Gamma_opt) maximizing Gamma_opt on the red side; ``route`` as in best_amplification."""
    rate = _DAMPING[route]

    def f(d):
        return -rate(point.with_(detuning=d))

    d, val = _search_sideband(point, f, -1, tol)
    return d, -val


def omo_threshold(point: OperatingPoint, n_max: float = 1e4, route: str = "squeezed") -> float:
    """Smallest polariton number with Gamma + Gamma_opt < 0 at the optimal blue detuning."""

    def margin(n):
        return point.gamma + best_amplification(point.with_(n=n), route)[1]

    if margin(n_max) >= 0:
        raise OutOfRange(f"no self-oscillation below n = {n_max}")
    return float(brentq(margin, 1e-9, n_max, rtol=1e-8))


# ----------------------------------------------------------- phonoritons


def phonoriton_modes(point: OperatingPoint) -> PhonoritonModes:
    """Normal modes of mechanics and the squeezed optical mode, mechanical damping neglected.

    omega_pn = (Omega - delta_s - i kappa/2)/2 +- sqrt(n g_s^2 + (Omega + delta_s + i kappa/2)^2/4),
    which reduces to {Omega, -delta_s - i kappa/2} at g_s = 0.
    """
    frame = squeeze_frame(point.chi, point.n, point.detuning, point.g)
    o, d, k = point.omega, frame.delta_s, point.kappa
    mean = 0.5 * (o - d - 0.5j * k)
    root = np.sqrt(point.n * frame.g_s**2 + (o + d + 0.5j * k) ** 2 / 4 + 0j)
    _, _, eta = enhancement(point)
    split = 2 * np.sqrt(complex(point.n * point.g**2 * eta[0] - k * k / 16))
    return PhonoritonModes((complex(mean - root), complex(mean + root)), split)
