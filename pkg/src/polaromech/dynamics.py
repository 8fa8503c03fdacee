"""Driven steady state of a Kerr polariton mode coupled to a mechanical mode.

Mean-field model (hbar = 1, displacement q in units of x_ZPF)::

    d(alpha)/dt = -i(-delta - i kappa/2 + chi |alpha|^2 - g q) alpha + F
    dq/dt = Omega p
    dp/dt = -Omega q - Gamma p + 2 g |alpha|^2

with F = sqrt(kappa_r n_in / 2). The static displacement is q = 2 g n / Omega,
which renormalizes the Kerr coefficient to chi - 2 g^2 / Omega.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import EigenSolverFailure, OutOfRange

PU_THRESHOLD = 1e-6  # |Re omega| / kappa separating parametric from single-mode instability


@dataclass(frozen=True)
class DriveConfig:
    detuning: float  # laser minus lower-polariton frequency, rad/s
    n_in: float  # input photon rate, 1/s
    kappa_r: float
    kappa: float
    gamma: float
    omega: float
    g: float
    chi: float

    def __post_init__(self):
        if not 0 < self.kappa_r <= self.kappa:
            raise OutOfRange("need 0 < kappa_r <= kappa")
        if not (self.gamma > 0 and self.omega > 0):
            raise OutOfRange("Gamma and Omega must be positive")
        if self.n_in < 0:
            raise OutOfRange("n_in must be non-negative")

    @property
    def chi_eff(self) -> float:
        return effective_kerr(self.chi, self.g, self.omega)

    @property
    def drive(self) -> float:
        return float(np.sqrt(self.kappa_r * self.n_in / 2))

    def scaled(self, factor: float) -> "DriveConfig":
        """Every rate, including n_in, multiplied by ``factor``."""
        return DriveConfig(*(factor * getattr(self, k) for k in ("detuning", "n_in", "kappa_r", "kappa", "gamma", "omega", "g", "chi")))

    def with_(self, **kw) -> "DriveConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class SteadyState:
    n: float
    alpha: complex
    q: float  # x_ZPF units
    chi_eff: float
    effective_detuning: float  # delta - 2 chi n + g q, the detuning seen by fluctuations
    branch: int  # 0 for the lowest root


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    stable: bool
    instability: str | None  # None, "single-mode" or "parametric"
    residual: float  # smallest singular value of (M - omega) over kappa, worst eigenvalue
    branch: int


def effective_kerr(chi: float, g: float, omega: float) -> float:
    if not omega > 0:
        raise OutOfRange("Omega must be positive")
    return chi - 2 * g * g / omega


# ----------------------------------------------------------- steady state


def input_rate(cfg: DriveConfig, n) -> np.ndarray:
    """n_in = (2/kappa_r) [(delta - chi~ n)^2 + kappa^2/4] n."""
    n = np.asarray(n, float)
    return 2 / cfg.kappa_r * ((cfg.detuning - cfg.chi_eff * n) ** 2 + cfg.kappa**2 / 4) * n


def _polish(cfg: DriveConfig, n: float) -> float:
    """Newton steps on the cubic, kept only while they reduce the residual (double roots stay put)."""

    def resid(n):
        return float(input_rate(cfg, n)) - cfg.n_in

    f = resid(n)
    for _ in range(3):
        d = cfg.detuning - cfg.chi_eff * n
        df = 2 / cfg.kappa_r * (d * d + cfg.kappa**2 / 4 - 2 * cfg.chi_eff * d * n)
        if df == 0:
            break
        trial = n - f / df
        ft = resid(trial)
        if not abs(ft) < abs(f):
            break
        n, f = trial, ft
    return n


def steady_state_roots(cfg: DriveConfig) -> list[SteadyState]:
    """All real non-negative polariton numbers solving the cubic, ascending."""
    ct, d, k = cfg.chi_eff, cfg.detuning, cfg.kappa
    if cfg.n_in == 0:
        roots = [0.0]
    elif ct == 0:
        roots = [cfg.kappa_r * cfg.n_in / (2 * (d * d + k * k / 4))]
    else:
        # in x = chi~ n / kappa: x^3 - 2 u x^2 + (u^2 + 1/4) x - c = 0
        u = d / k
        c = ct * cfg.kappa_r * cfg.n_in / (2 * k**3)
        raw = np.roots([1.0, -2 * u, u * u + 0.25, -c])
        scale = max(np.abs(raw).max(), 1e-300)
        # a double root at the fold splits into a pair with Im ~ sqrt(eps)
        real = sorted(z.real for z in raw if abs(z.imag) <= 1e-7 * scale)
        roots = [_polish(cfg, x * k / ct) for x in real]
        roots = [n for n in roots if n >= 0]
        roots = sorted(roots)
        roots = [n for i, n in enumerate(roots) if i == 0 or n - roots[i - 1] > 1e-9 * max(n, 1.0)]
    return [_state(cfg, n, i) for i, n in enumerate(roots)]


def _state(cfg: DriveConfig, n: float, branch: int) -> SteadyState:
    ct, d = cfg.chi_eff, cfg.detuning
    alpha = -1j * cfg.drive / (-d + ct * n - 0.5j * cfg.kappa) if cfg.n_in else 0j
    q = 2 * cfg.g * n / cfg.omega
    return SteadyState(float(n), complex(alpha), float(q), ct, float(d - 2 * cfg.chi * n + cfg.g * q), branch)


def state_at(cfg: DriveConfig, n: float) -> tuple[DriveConfig, SteadyState]:
    """The drive that places a root exactly at polariton number ``n``, and that root."""
    if n < 0:
        raise OutOfRange("polariton number must be non-negative")
    cfg = cfg.with_(n_in=float(input_rate(cfg, n)))
    return cfg, _state(cfg, float(n), 0)


def bistability_bounds(cfg: DriveConfig, rtol: float = 1e-12) -> tuple[float, float] | None:
    """Turning points n_- <= n_+ of n_in(n), or None outside the fold.

    n_+- = 2 delta/(3 chi~) +- sqrt(4 delta^2 - 3 kappa^2)/(6 chi~).
    """
    ct = cfg.chi_eff
    if ct == 0:
        raise OutOfRange("bistability needs a non-zero effective Kerr coefficient")
    d, k = cfg.detuning, cfg.kappa
    disc = 4 * d * d - 3 * k * k
    if disc < -rtol * 3 * k * k:
        return None
    root = np.sqrt(max(disc, 0.0))
    a = (4 * d - root) / (6 * ct)
    b = (4 * d + root) / (6 * ct)
    lo, hi = sorted((a, b))
    if lo < 0:
        return None
    return float(lo), float(hi)


def fold_input_rates(cfg: DriveConfig) -> tuple[float, float] | None:
    """n_in at the turning points (the analytic edge of the bistable region)."""
    bounds = bistability_bounds(cfg)
    if bounds is None:
        return None
    lo, hi = sorted(float(input_rate(cfg, n)) for n in bounds)
    return lo, hi


# ------------------------------------------------------------ stability


def linear_matrix(alpha: complex, detuning_eff: float, kappa: float, omega: float, gamma: float, g: float, chi: float) -> np.ndarray:
    """M with d v/dt = -i M v for fluctuations v = (d alpha, d alpha*, d q, d p)."""
    chi_a2 = chi * alpha * alpha
    jac = np.array(
        [
            [1j * detuning_eff - kappa / 2, -1j * chi_a2, 1j * g * alpha, 0],
            [1j * np.conj(chi_a2), -1j * detuning_eff - kappa / 2, -1j * g * np.conj(alpha), 0],
            [0, 0, 0, omega],
            [2 * g * np.conj(alpha), 2 * g * alpha, -omega, -gamma],
        ],
        dtype=complex,
    )
    return 1j * jac  # eigenvalues omega = i lambda


def stability_matrix(ss: SteadyState, cfg: DriveConfig) -> np.ndarray:
    return linear_matrix(ss.alpha, ss.effective_detuning, cfg.kappa, cfg.omega, cfg.gamma, cfg.g, cfg.chi)


def stability_eigenvalues(ss: SteadyState, cfg: DriveConfig) -> StabilityReport:
    """Eigenvalues omega of the linearized dynamics; Im omega > 0 is unstable."""
    return analyze_matrix(stability_matrix(ss, cfg), cfg.kappa, ss.branch)


def analyze_matrix(m: np.ndarray, kappa: float, branch: int = 0) -> StabilityReport:
    try:
        w = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverFailure(str(exc)) from exc
    if not np.all(np.isfinite(w)):
        raise EigenSolverFailure("non-finite eigenvalues")
    w = w[np.lexsort((w.imag, w.real))]
    residual = max(np.linalg.svd(m - z * np.eye(len(w)), compute_uv=False)[-1] for z in w) / kappa
    growing = w[w.imag > 1e-12 * kappa]
    if growing.size == 0:
        kind = None
    elif np.any(np.abs(growing.real) > PU_THRESHOLD * kappa):
        kind = "parametric"
    else:
        kind = "single-mode"
    return StabilityReport(w, kind is None, kind, float(residual), branch)


@dataclass(frozen=True)
class PointClass:
    label: str  # "SM" (one root), "BS" (three roots), "PU" (only root parametrically unstable)
    roots: tuple[SteadyState, ...]
    reports: tuple[StabilityReport, ...]

    @property
    def max_growth(self) -> float:
        return max(float(r.eigenvalues.imag.max()) for r in self.reports)


def classify(cfg: DriveConfig) -> PointClass:
    roots = tuple(steady_state_roots(cfg))
    reports = tuple(stability_eigenvalues(ss, cfg) for ss in roots)
    if len(roots) == 3:
        label = "BS"
    elif any(r.instability == "parametric" for r in reports):
        label = "PU"
    else:
        label = "SM"
    return PointClass(label, roots, reports)


def stability_map(cfg: DriveConfig, detunings, input_rates) -> list[PointClass]:
    """Row-major over (detuning, n_in)."""
    return [classify(cfg.with_(detuning=float(d), n_in=float(n))) for d in detunings for n in input_rates]


# ------------------------------------------------------ mean-field oracle


def mean_field_rhs(cfg: DriveConfig):
    """Real-valued vector field for y = (Re alpha, Im alpha, q, p)."""
    k, F = cfg.kappa, cfg.drive

    def rhs(t, y):
        a = y[0] + 1j * y[1]
        n = y[0] ** 2 + y[1] ** 2
        da = -1j * (-cfg.detuning - 0.5j * k + cfg.chi * n - cfg.g * y[2]) * a + F
        return [da.real, da.imag, cfg.omega * y[3], -cfg.omega * y[2] - cfg.gamma * y[3] + 2 * cfg.g * n]

    return rhs


def ode_departs(cfg: DriveConfig, ss: SteadyState, perturbation: float = 1e-6, horizon: float = 1e4, factor: float = 10.0, rtol: float = 1e-10) -> bool:
    """Integrate from the fixed point plus a small kick; True if |alpha - alpha~| grows ``factor``-fold.

    ``perturbation`` is relative to max(|alpha~|, 1); ``horizon`` is in units of 1/kappa.
    """
    a0 = ss.alpha
    kick = perturbation * max(abs(a0), 1.0)
    y0 = [a0.real + kick, a0.imag, ss.q, 0.0]

    def escaped(t, y):
        return np.hypot(y[0] - a0.real, y[1] - a0.imag) - factor * kick

    escaped.terminal = True
    escaped.direction = 1
    sol = solve_ivp(mean_field_rhs(cfg), (0.0, horizon / cfg.kappa), y0, method="DOP853", rtol=rtol, atol=1e-12 * max(abs(a0), 1.0), events=escaped)
    return bool(sol.t_events[0].size)


def ode_departs_many(
    cfgs, states, perturbation: float = 1e-6, horizon: float = 1e4, factor: float = 10.0, rtol: float = 1e-8, samples: int = 2001
) -> np.ndarray:
    """Vectorized ``ode_departs`` over many (cfg, fixed point) pairs in one integration.

    Departure is judged on ``samples`` evenly spaced outputs instead of a terminal event.
    """
    cfgs, states = list(cfgs), list(states)
    if len(cfgs) != len(states):
        raise ValueError("cfgs and states differ in length")
    par = {k: np.array([getattr(c, k) for c in cfgs]) for k in ("detuning", "kappa", "gamma", "omega", "g", "chi")}
    F = np.array([c.drive for c in cfgs])
    a0 = np.array([s.alpha for s in states])
    kick = perturbation * np.maximum(np.abs(a0), 1.0)
    kappa_min = par["kappa"].min()

    def rhs(t, y):
        y = y.reshape(4, -1)
        a = y[0] + 1j * y[1]
        n = y[0] ** 2 + y[1] ** 2
        da = -1j * (-par["detuning"] - 0.5j * par["kappa"] + par["chi"] * n - par["g"] * y[2]) * a + F
        dp = -par["omega"] * y[2] - par["gamma"] * y[3] + 2 * par["g"] * n
        return np.concatenate([da.real, da.imag, par["omega"] * y[3], dp])

    y0 = np.concatenate([a0.real + kick, a0.imag, [s.q for s in states], np.zeros(len(states))])
    t = np.linspace(0.0, horizon / kappa_min, samples)
    sol = solve_ivp(rhs, (0.0, t[-1]), y0, method="DOP853", t_eval=t, rtol=rtol, atol=1e-12)
    y = sol.y.reshape(4, len(states), -1)
    dist = np.hypot(y[0] - a0.real[:, None], y[1] - a0.imag[:, None])
    return np.nanmax(dist, axis=1) > factor * kick
