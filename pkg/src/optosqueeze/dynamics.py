"""Linear (Gaussian) open-system dynamics.

A quadratic Hamiltonian plus amplitude damping gives closed equations for the
first and second quadrature moments,

    d mu / dt = A(t) mu,        dV / dt = A(t) V + V A(t)^T + D,

which :func:`evolve` integrates and :func:`steady_state` solves for constant A.
Frequencies are in units of the mechanical frequency, times in 1/omega_m.
A Lindblad term kappa * D[a] damps the amplitude of a at kappa/2 and adds
kappa (n + 1/2) to the diffusion of each quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, StabilityError
from .gaussian import GaussianState, passive_symplectic

RTOL = 1e-9
ATOL = 1e-12


@dataclass(frozen=True)
class CouplingProfile:
    """Two-tone effective coupling chi(t) = chi1 e^{-i(Omega t - phi)} + chi2."""

    chi1: float
    chi2: float
    omega_mod: float = 2.0
    phi: float = 0.0

    def __post_init__(self):
        if self.chi1 < 0 or self.chi2 < 0:
            raise ValueError("coupling amplitudes must be nonnegative")

    def at(self, t):
        return self.chi1 * np.exp(-1j * (self.omega_mod * np.asarray(t) - self.phi)) + self.chi2

    def shifted(self, dphi: float) -> "CouplingProfile":
        return CouplingProfile(self.chi1, self.chi2, self.omega_mod, (self.phi + dphi) % (2 * np.pi))


@dataclass(frozen=True)
class DriveSpec:
    """Two-tone pump E(t) = e1 e^{-i(Omega t - phi1)} + e2 e^{i phi2}."""

    e1: float
    e2: float
    omega_mod: float = 2.0
    phi1: float = 0.0
    phi2: float = 0.0

    def __post_init__(self):
        if self.e1 < 0 or self.e2 < 0:
            raise ValueError("pump amplitudes must be nonnegative")

    def at(self, t):
        t = np.asarray(t)
        return self.e1 * np.exp(-1j * (self.omega_mod * t - self.phi1)) + self.e2 * np.exp(1j * self.phi2)


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of either setup, in units of omega_m.

    ``chi1``, ``chi2``, ``phi`` describe the effective coupling directly; when
    ``pump`` is non-empty the protocols derive it from the drives instead
    (see :func:`optosqueeze.meanfield.chi_from_drive`).
    """

    kappa: float = 0.05
    gamma_m: float = 0.0
    n_th: float = 0.0
    chi1: float = 0.01
    chi2: float = 0.03
    phi: float = 0.0
    omega_m: float = 1.0
    delta: float | None = None
    omega_mod: float | None = None
    g: float = 1e-6
    j12: float = 0.0
    pump: tuple[DriveSpec, ...] = ()

    def __post_init__(self):
        for name in ("kappa", "gamma_m", "n_th", "chi1", "chi2", "omega_m"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)}")
        object.__setattr__(self, "pump", tuple(self.pump))

    @property
    def detuning(self) -> float:
        return self.omega_m if self.delta is None else self.delta

    @property
    def modulation(self) -> float:
        return 2 * self.omega_m if self.omega_mod is None else self.omega_mod

    def profile(self) -> CouplingProfile:
        return CouplingProfile(self.chi1, self.chi2, self.modulation, self.phi)


@dataclass(frozen=True, eq=False)
class LinearDynamics:
    """Drift generator A(t) and constant diffusion D for ``n_modes`` modes."""

    n_modes: int
    drift_at: Callable[[float], np.ndarray]
    diffusion: np.ndarray
    is_time_dependent: bool = False
    period: float | None = None
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        D = np.asarray(self.diffusion, dtype=float)
        if D.shape != (2 * self.n_modes, 2 * self.n_modes):
            raise ValueError("diffusion matrix has the wrong shape")
        if np.max(np.abs(D - D.T)) > 1e-12 or np.linalg.eigvalsh(D)[0] < -1e-12:
            raise ValueError("diffusion matrix must be symmetric positive semidefinite")
        object.__setattr__(self, "diffusion", D)

    @property
    def drift(self) -> np.ndarray:
        if self.is_time_dependent:
            raise ValueError("drift is time dependent; use drift_at(t)")
        return self.drift_at(0.0)


def quadratic_drift(h, s) -> np.ndarray:
    """Drift of H = sum h_jk c_j^dag c_k + 1/2 sum (s_jk c_j^dag c_k^dag + h.c.).

    ``h`` is Hermitian, ``s`` symmetric. Heisenberg's equation gives
    dc/dt = -i (h c + s c^dag), rewritten here for quadratures.
    """
    h = np.asarray(h, dtype=complex)
    s = np.asarray(s, dtype=complex)
    n = h.shape[0]
    A = np.zeros((2 * n, 2 * n))
    A[0::2, 0::2] = h.imag + s.imag
    A[0::2, 1::2] = h.real - s.real
    A[1::2, 0::2] = -(h.real + s.real)
    A[1::2, 1::2] = h.imag - s.imag
    return A


def damping(rates, occupations=None) -> tuple[np.ndarray, np.ndarray]:
    """Drift and diffusion of Lindblad damping rate*(n+1) D[c] + rate*n D[c^dag]."""
    rates = np.asarray(rates, dtype=float)
    occ = np.zeros_like(rates) if occupations is None else np.asarray(occupations, dtype=float)
    A = -0.5 * np.diag(np.repeat(rates, 2))
    D = np.diag(np.repeat(rates * (occ + 0.5), 2))
    return A, D


def _constant(A: np.ndarray) -> Callable[[float], np.ndarray]:
    A = np.array(A, dtype=float)
    A.setflags(write=False)
    return lambda t: A


def _optomech_hamiltonian(detunings, omega_m, chi, j12=0.0):
    """(h, s) for cavities a_j and mechanics b_j with (chi a^dag + chi* a)(b + b^dag).

    Mode order (a_1..a_n, b_1..b_n); cavity j couples to mechanics j.
    """
    n = len(detunings)
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    s = np.zeros((2 * n, 2 * n), dtype=complex)
    for j in range(n):
        h[j, j] = detunings[j]
        h[n + j, n + j] = omega_m
        h[j, n + j] = chi
        h[n + j, j] = np.conj(chi)
        s[j, n + j] = s[n + j, j] = chi
    if n == 2:
        h[0, 1] = h[1, 0] = j12
    return h, s


def build_rwa_model(profile: CouplingProfile, kappa: float, gamma_m: float, n_th: float) -> LinearDynamics:
    """Rotating-frame model H = (chi1 e^{-i phi} b + chi2 b^dag) a + h.c.

    Modes (a, b). Constant drift.
    """
    chi_p = profile.chi1 * np.exp(1j * profile.phi)
    h = np.array([[0.0, profile.chi2], [profile.chi2, 0.0]], dtype=complex)
    s = np.array([[0.0, chi_p], [chi_p, 0.0]])
    A_loss, D = damping([kappa, gamma_m], [0.0, n_th])
    return LinearDynamics(2, _constant(quadratic_drift(h, s) + A_loss), D, labels=("a", "b"))


def _periodic_model(detunings, omega_m, profile, rates, occupations, j12=0.0, labels=()):
    """Lab-frame model with drift linear in Re chi(t), Im chi(t)."""
    n = len(detunings)
    base = quadratic_drift(*_optomech_hamiltonian(detunings, omega_m, 0.0, j12))
    unit_re = quadratic_drift(*_optomech_hamiltonian(detunings, omega_m, 1.0, j12)) - base
    unit_im = quadratic_drift(*_optomech_hamiltonian(detunings, omega_m, 1.0j, j12)) - base
    A_loss, D = damping(rates, occupations)
    base = base + A_loss
    c1, c2, w, phi = profile.chi1, profile.chi2, profile.omega_mod, profile.phi

    def drift_at(t):
        arg = w * t - phi
        return base + (c1 * math.cos(arg) + c2) * unit_re - (c1 * math.sin(arg)) * unit_im

    td = c1 != 0.0 and w != 0.0
    return LinearDynamics(2 * n, drift_at, D, is_time_dependent=td,
                          period=(2 * np.pi / w) if td else None, labels=labels)


def build_full_model(profile: CouplingProfile, delta: float, omega_m: float, kappa: float,
                     gamma_m: float, n_th: float) -> LinearDynamics:
    """Lab-frame model H = delta a^dag a + omega_m b^dag b + [chi*(t) a + chi(t) a^dag](b + b^dag)."""
    return _periodic_model([delta], omega_m, profile, [kappa, gamma_m], [0.0, n_th], labels=("a", "b"))


@dataclass(frozen=True, eq=False)
class TwoCavityModel:
    """Four-mode coupled-cavity model and its normal-mode reduction.

    ``full`` orders modes (a1, a2, c1, c2). ``normal_modes`` are the
    independent (d_j, b_j) models with cavity detunings delta +/- j12, where
    d_{1,2} = (a1 +/- a2)/sqrt 2 and b_{1,2} = (c1 +/- c2)/sqrt 2.
    """

    full: LinearDynamics
    normal_modes: tuple[LinearDynamics, LinearDynamics]
    to_normal: np.ndarray


def build_two_cavity_model(params: SystemParams, profile: CouplingProfile) -> TwoCavityModel:
    delta, w = params.detuning, params.omega_m
    rates = [params.kappa, params.kappa, params.gamma_m, params.gamma_m]
    occ = [0.0, 0.0, params.n_th, params.n_th]
    full = _periodic_model([delta, delta], w, profile, rates, occ, j12=params.j12,
                           labels=("a1", "a2", "c1", "c2"))
    reduced_models = tuple(
        build_full_model(profile, delta + sign * params.j12, w, params.kappa, params.gamma_m, params.n_th)
        for sign in (+1, -1)
    )
    return TwoCavityModel(full, reduced_models, normal_mode_map())


def normal_mode_map() -> np.ndarray:
    """Symplectic map (a1, a2, c1, c2) -> (d1, b1, d2, b2)."""
    r = 1.0 / np.sqrt(2.0)
    U = np.array([
        [r, r, 0, 0],
        [0, 0, r, r],
        [r, -r, 0, 0],
        [0, 0, r, -r],
    ])
    return passive_symplectic(U)


def stability_eigenvalues(dyn: LinearDynamics) -> np.ndarray:
    if dyn.is_time_dependent:
        raise ValueError("eigenvalues are defined for a constant drift")
    return np.linalg.eigvals(dyn.drift)


def steady_state(dyn: LinearDynamics) -> GaussianState:
    """Solve A V + V A^T + D = 0 through the vectorized (Kronecker) system."""
    eig = stability_eigenvalues(dyn)
    worst = eig[np.argmax(eig.real)]
    if worst.real >= 0:
        raise StabilityError(f"drift is not Hurwitz: eigenvalue {worst:.6g}", eigenvalue=complex(worst))
    return GaussianState(np.zeros(2 * dyn.n_modes), solve_lyapunov(dyn.drift, dyn.diffusion))


def solve_lyapunov(A: np.ndarray, D: np.ndarray) -> np.ndarray:
    """V with A V + V A^T + D = 0, from the vectorized (Kronecker) linear system."""
    n = A.shape[0]
    I = np.eye(n)
    L = np.kron(I, A) + np.kron(A, I)
    V = np.linalg.solve(L, -np.asarray(D, dtype=float).reshape(-1)).reshape(n, n)
    return 0.5 * (V + V.T)


def slowest_rate(dyn: LinearDynamics) -> float:
    """|Re| of the least-damped drift eigenvalue."""
    return float(np.min(np.abs(stability_eigenvalues(dyn).real)))


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    means: np.ndarray
    covs: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, k: int) -> GaussianState:
        return GaussianState(self.means[k], self.covs[k])

    @property
    def final(self) -> GaussianState:
        return self[-1]

    def states(self) -> list[GaussianState]:
        return [self[k] for k in range(len(self))]


def evolve(dyn: LinearDynamics, state: GaussianState, t_span: Sequence[float],
           output_grid=None, rtol: float = RTOL, atol: float = ATOL,
           method: str = "DOP853") -> Trajectory:
    """Integrate the moment equations with an embedded adaptive Runge-Kutta pair.

    ``output_grid`` defaults to the two endpoints of ``t_span``.
    """
    if state.n_modes != dyn.n_modes:
        raise ValueError(f"state has {state.n_modes} modes, model has {dyn.n_modes}")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    grid = np.array([t0, t1]) if output_grid is None else np.asarray(output_grid, dtype=float)
    m = 2 * dyn.n_modes
    D_flat = dyn.diffusion.reshape(-1)
    drift_at = dyn.drift_at

    def rhs(t, y):
        A = drift_at(t)
        out = np.empty_like(y)
        out[:m] = A @ y[:m]
        AV = A @ y[m:].reshape(m, m)
        np.add(AV, AV.T, out=out[m:].reshape(m, m))
        out[m:] += D_flat
        return out

    y0 = np.concatenate([state.mean, state.cov.reshape(-1)])
    sol = solve_ivp(rhs, (t0, t1), y0, method=method, t_eval=grid, rtol=rtol, atol=atol)
    if sol.status != 0:
        t_fail = float(sol.t[-1]) if sol.t.size else t0
        raise IntegrationError(f"moment integration failed: {sol.message}", t_fail)
    means = sol.y[:m].T.copy()
    covs = sol.y[m:].T.reshape(-1, m, m)
    covs = 0.5 * (covs + covs.transpose(0, 2, 1))
    return Trajectory(sol.t.copy(), means, covs)
