"""Classical pump fields and the coupling they induce.

The mean cavity amplitude alpha and mechanical amplitude beta of one
cavity/normal-mode pair obey

    d alpha/dt = -[kappa + i delta + i g (beta + beta*)] alpha + E(t)
    d beta/dt  = -(gamma_m + i omega_m) beta - i g |alpha|^2

with the two-tone pump E(t) = e1 e^{-i(Omega t - phi1)} + e2 e^{i phi2}.
Note the cavity amplitude decays at kappa here, not kappa/2 as in the
fluctuation dynamics; both conventions are kept as in the source model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import least_squares

from .dynamics import CouplingProfile, DriveSpec, SystemParams
from .errors import ConditionError, IntegrationError, NoSolutionError

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class MeanFieldTrajectory:
    """Amplitudes per subsystem: ``alpha[:, j]`` and ``beta[:, j]`` for drive j."""

    times: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray


def _drives(params: SystemParams) -> tuple[DriveSpec, ...]:
    if not params.pump:
        raise ValueError("params.pump must list at least one DriveSpec")
    return params.pump


def integrate_meanfield(params: SystemParams, t_end: float, grid=4001,
                        rtol: float = 1e-10, atol: float = 1e-10) -> MeanFieldTrajectory:
    """Integrate the mean-field equations from alpha = beta = 0, one subsystem per drive."""
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    drives = _drives(params)
    n = len(drives)
    kappa, delta, g = params.kappa, params.detuning, params.g
    gamma, w = params.gamma_m, params.omega_m
    e1 = np.array([d.e1 for d in drives])
    e2c = np.array([d.e2 * np.exp(1j * d.phi2) for d in drives])
    om = np.array([d.omega_mod for d in drives])
    ph1 = np.array([d.phi1 for d in drives])

    def rhs(t, y):
        a, b = y[:n], y[n:]
        pump = e1 * np.exp(-1j * (om * t - ph1)) + e2c
        da = -(kappa + 1j * delta + 2j * g * b.real) * a + pump
        db = -(gamma + 1j * w) * b - 1j * g * (a.real**2 + a.imag**2)
        return np.concatenate([da, db])

    def blowup(t, y):
        return DIVERGENCE_LIMIT - np.max(np.abs(y[:n]))

    blowup.terminal = True
    times = np.linspace(0.0, t_end, int(grid)) if np.isscalar(grid) else np.asarray(grid, dtype=float)
    sol = solve_ivp(rhs, (0.0, float(times[-1])), np.zeros(2 * n, dtype=complex), method="DOP853",
                    t_eval=times, rtol=rtol, atol=atol, events=blowup)
    if sol.status == 1:
        raise IntegrationError("cavity amplitude diverged beyond 1e12", float(sol.t_events[0][0]))
    if sol.status != 0:
        raise IntegrationError(f"mean-field integration failed: {sol.message}",
                               float(sol.t[-1]) if sol.t.size else 0.0)
    return MeanFieldTrajectory(sol.t, sol.y[:n].T.copy(), sol.y[n:].T.copy())


def _check_perturbative(params: SystemParams, drive: DriveSpec) -> None:
    w = params.omega_m
    if abs(params.detuning - w) > 1e-9 * w or abs(drive.omega_mod - 2 * w) > 1e-9 * w:
        raise ConditionError("perturbative amplitudes need delta = omega_m and Omega = 2 omega_m")
    if params.gamma_m > 1e-2 * w:
        raise ConditionError("perturbative amplitudes need gamma_m << omega_m")
    lag = math.atan2(w, params.kappa)
    d = (drive.phi2 - lag) % (2 * math.pi)
    if min(d, 2 * math.pi - d) > 1e-9:
        raise ConditionError("perturbative amplitudes assume phi2 = arctan(omega_m / kappa)")


def perturbative_solution(params: SystemParams, t, j: int = 0):
    """Long-time amplitudes alpha^(0), alpha^(2), beta^(1) of subsystem ``j``."""
    drive = _drives(params)[j]
    _check_perturbative(params, drive)
    t = np.asarray(t, dtype=float)
    k, w, g = params.kappa, params.omega_m, params.g
    E1, E2, W = drive.e1, drive.e2, drive.omega_mod
    phi = drive.phi1 + drive.phi2
    q = k**2 + w**2
    alpha0 = (E1 * np.exp(-1j * (W * t - phi)) + E2) / math.sqrt(q)
    pre = 2j * g**2 / (3 * w * q**2)
    alpha2 = (
        pre * E2 * (2 * E1**2 + 3 * E2**2) * np.exp(-1j * (phi - drive.phi1))
        + pre * E1 * (3 * E1**2 + 2 * E2**2) * np.exp(-1j * (W * t - (2 * phi - drive.phi1)))
        - pre * E1 * E2**2 * np.exp(1j * (W * t - drive.phi1))
        - 2j * g**2 * E1**2 * E2 / (3 * w * q**1.5 * (k - 3j * w)) * np.exp(-2j * (W * t - phi))
    )
    beta1 = (
        -g * (E1**2 + E2**2) / (w * q)
        - g * E1 * E2 / (3 * w * q) * np.exp(1j * (W * t - phi))
        + g * E1 * E2 / (w * q) * np.exp(-1j * (W * t - phi))
    )
    return alpha0, alpha2, beta1


def fit_harmonics(times, values, omegas, window: float = 0.25, extra=None) -> dict:
    """Least-squares coefficients of e^{-i w t} for each w on the final ``window`` fraction.

    ``extra`` maps labels to additional basis functions f(t) fitted jointly.
    Returns {w: coefficient} plus the ``extra`` labels.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values)
    start = times[-1] - window * (times[-1] - times[0])
    sel = times >= start
    t = times[sel]
    cols = [np.exp(-1j * w * t) for w in omegas]
    labels = list(omegas)
    for name, f in (extra or {}).items():
        cols.append(f(t))
        labels.append(name)
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), values[sel], rcond=None)
    return dict(zip(labels, coef))


def phase_conditions(kappa: float, omega_m: float, phi_target1: float) -> tuple[float, float, float, float]:
    """Laser phases (phi11, phi12, phi21, phi22) giving phi1 = target and phi2 = phi1 + pi."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    lag = math.atan(omega_m / kappa)
    phi11 = (phi_target1 - lag) % (2 * math.pi)
    return phi11, lag, phi11 + math.pi, lag


def chi_from_drive(g: float, drive: DriveSpec, kappa: float, omega_m: float,
                   delta: float | None = None) -> CouplingProfile:
    """Effective coupling g * alpha^(0)(t) produced by a resonant two-tone pump.

    For a general phi2 the constant tone carries phase phi2 - arctan(omega_m/kappa),
    which is absorbed into the cavity mode; the profile phase is then
    phi1 + 2 arctan(omega_m/kappa) - phi2 (= phi1 + phi2 at the standard choice).
    """
    if delta is not None and abs(delta - omega_m) > 1e-9 * omega_m:
        raise ConditionError("chi_from_drive needs delta = omega_m")
    if abs(drive.omega_mod - 2 * omega_m) > 1e-9 * omega_m:
        raise ConditionError("chi_from_drive needs Omega = 2 omega_m")
    scale = g / math.sqrt(kappa**2 + omega_m**2)
    lag = math.atan2(omega_m, kappa)
    phi = (drive.phi1 + 2 * lag - drive.phi2) % (2 * math.pi)
    return CouplingProfile(scale * drive.e1, scale * drive.e2, drive.omega_mod, phi)


@dataclass(frozen=True)
class MembraneGeometry:
    """Two membranes in a two-mode cavity. ``positions`` may be omitted when solving for them."""

    length: float
    mass: float
    reflectivity: tuple[float, float]
    k_c: tuple[float, float]
    omega_c: tuple[float, float]
    positions: tuple[float, float] | None = None
    omega_m: float = 1.0

    def __post_init__(self):
        if not all(0 < R < 1 for R in self.reflectivity):
            raise ValueError("reflection coefficients must lie in (0, 1)")
        if self.positions is not None and not all(0 < x < self.length for x in self.positions):
            raise ValueError("membrane positions must lie inside the cavity")

    def with_positions(self, x1: float, x2: float) -> "MembraneGeometry":
        return MembraneGeometry(self.length, self.mass, self.reflectivity, self.k_c,
                                self.omega_c, (x1, x2), self.omega_m)

    def swapped(self) -> "MembraneGeometry":
        pos = None if self.positions is None else self.positions[::-1]
        return MembraneGeometry(self.length, self.mass, self.reflectivity[::-1], self.k_c,
                                self.omega_c, pos, self.omega_m)


def _f(k, R, x):
    arg = 2 * k * np.asarray(x)
    return 2 * R * np.sin(arg) / np.sqrt(1 - R**2 * np.cos(arg) ** 2)


def _g_entry(geom: MembraneGeometry, j: int, k: int, x):
    return geom.omega_c[j] * _f(geom.k_c[j], geom.reflectivity[k], x) / (
        geom.length * math.sqrt(geom.mass * geom.omega_m))


def coupling_from_geometry(geom: MembraneGeometry) -> np.ndarray:
    """Single-photon couplings g[j, k] between cavity mode j and membrane k."""
    if geom.positions is None:
        raise ValueError("geometry has no membrane positions")
    return np.array([[_g_entry(geom, j, k, geom.positions[k]) for k in range(2)] for j in range(2)])


def symmetry_residual(geom: MembraneGeometry) -> np.ndarray:
    """(g11 - g12, g21 + g22): zero when the normal modes decouple."""
    g = coupling_from_geometry(geom)
    return np.array([g[0, 0] - g[0, 1], g[1, 0] + g[1, 1]])


def solve_membrane_positions(geom: MembraneGeometry, tolerance: float = 1e-8,
                             n_grid: int = 10_000, n_candidates: int = 40) -> tuple[float, float]:
    """Positions with g11 = g12 and g21 = -g22, both couplings nonzero.

    Scans an ``n_grid`` x ``n_grid`` grid over the open cavity, then refines
    the best candidates by bounded least squares. The accepted residual is
    below ``tolerance`` times the smaller of |g1|, |g2|.
    """
    L = geom.length
    x = (np.arange(n_grid) + 0.5) * (L / n_grid)
    G = [[_g_entry(geom, j, k, x) for k in range(2)] for j in range(2)]
    scale = max(np.max(np.abs(G[0][0])), np.max(np.abs(G[1][0])))
    # reject placements near a node, where both couplings vanish trivially
    floor = (0.05 * np.max(np.abs(G[0][0])), 0.05 * np.max(np.abs(G[1][0])))
    ok1 = (np.abs(G[0][0]) > floor[0]) & (np.abs(G[1][0]) > floor[1])

    best_idx, best_score = [], []
    chunk = max(1, 2_000_000 // n_grid)
    for i0 in range(0, n_grid, chunk):
        rows = slice(i0, min(i0 + chunk, n_grid))
        score = (np.abs(G[0][0][rows, None] - G[0][1][None, :])
                 + np.abs(G[1][0][rows, None] + G[1][1][None, :])) / scale
        score[~ok1[rows]] = np.inf
        flat = score.ravel()
        take = min(n_candidates, flat.size)
        part = np.argpartition(flat, take - 1)[:take]
        best_idx.extend(np.ravel_multi_index(np.unravel_index(part, score.shape), score.shape)
                        + i0 * n_grid)
        best_score.extend(flat[part])
    order = np.argsort(best_score)[:n_candidates]

    def resid(p):
        return np.array([_g_entry(geom, 0, 0, p[0]) - _g_entry(geom, 0, 1, p[1]),
                         _g_entry(geom, 1, 0, p[0]) + _g_entry(geom, 1, 1, p[1])]) / scale

    eps = L * 1e-12
    found = []
    for o in order:
        if not np.isfinite(best_score[o]):
            continue
        i, k = divmod(int(best_idx[o]), n_grid)
        sol = least_squares(resid, [x[i], x[k]], bounds=([eps, eps], [L - eps, L - eps]),
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        x1, x2 = sol.x
        g = coupling_from_geometry(geom.with_positions(x1, x2))
        if abs(g[0, 0]) <= floor[0] or abs(g[1, 0]) <= floor[1]:
            continue
        size = min(abs(g[0, 0]), abs(g[1, 0]))
        res = float(np.max(np.abs(resid(sol.x)))) * scale
        if res < tolerance * size:
            found.append((res / size, float(x1), float(x2)))
    if not found:
        raise NoSolutionError("no membrane placement satisfies the coupling symmetry within tolerance")
    _, x1, x2 = min(found)
    return x1, x2
