"""Brute-force density-matrix integration of the rotating-frame squeezing model.

Cross-checks the Gaussian moment engine on one cavity mode a and one
mechanical normal mode b in a truncated Fock basis:

    d rho/dt = -i[H, rho] + kappa D[a] rho + gamma_m (n_th + 1) D[b] rho + gamma_m n_th D[b^dag] rho,
    H = (chi1 e^{-i phi} b + chi2 b^dag) a + h.c.,   D[L] rho = L rho L^dag - {L^dag L, rho}/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .dynamics import CouplingProfile
from .errors import IntegrationError, InvalidState, TruncationError

LEAK_TOL = 1e-6


@dataclass(frozen=True)
class FockConfig:
    dim_cavity: int = 12
    dim_mech: int = 12
    rtol: float = 1e-8
    atol: float = 1e-11
    t_end: float = 800.0

    def __post_init__(self):
        if self.dim_cavity < 4 or self.dim_mech < 4:
            raise ValueError("Fock truncation needs at least 4 levels per mode")

    def enlarged(self, extra: int) -> "FockConfig":
        return FockConfig(self.dim_cavity + extra, self.dim_mech + extra, self.rtol, self.atol, self.t_end)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Density matrix on cavity (x) mechanics, cavity index slowest."""

    matrix: np.ndarray
    dims: tuple[int, int]

    def __post_init__(self):
        rho = self.matrix
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise InvalidState("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1) > 1e-8:
            raise InvalidState(f"density matrix trace {np.trace(rho).real:.12f} != 1")

    def populations(self, mode: int) -> np.ndarray:
        """Fock-level populations of mode 0 (cavity) or 1 (mechanics)."""
        da, db = self.dims
        p = np.real(np.diag(self.matrix)).reshape(da, db)
        return p.sum(axis=1 - mode)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def _destroy(n: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n)), 1, format="csr", dtype=complex)


def mode_operators(cfg: FockConfig) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Annihilation operators (a, b) on the joint truncated space."""
    ia = sp.identity(cfg.dim_cavity, format="csr", dtype=complex)
    ib = sp.identity(cfg.dim_mech, format="csr", dtype=complex)
    return sp.kron(_destroy(cfg.dim_cavity), ib, format="csr"), sp.kron(ia, _destroy(cfg.dim_mech), format="csr")


def _thermal_dm(n: float, dim: int) -> np.ndarray:
    k = np.arange(dim)
    p = (k == 0).astype(float) if n == 0 else (n / (n + 1)) ** k / (n + 1)
    return np.diag(p / p.sum()).astype(complex)


def product_thermal(cfg: FockConfig, n_cavity: float = 0.0, n_mech: float = 0.0) -> np.ndarray:
    return np.kron(_thermal_dm(n_cavity, cfg.dim_cavity), _thermal_dm(n_mech, cfg.dim_mech))


def fock_state(cfg: FockConfig, n_cavity: int, n_mech: int) -> np.ndarray:
    psi = np.zeros(cfg.dim_cavity * cfg.dim_mech, dtype=complex)
    psi[n_cavity * cfg.dim_mech + n_mech] = 1.0
    return np.outer(psi, psi.conj())


def evolve_dm(profile: CouplingProfile, kappa: float, gamma_m: float, n_th: float,
              cfg: FockConfig = FockConfig(), rho0=None) -> DensityOperator:
    """Integrate the master equation to ``cfg.t_end`` from ``rho0`` (default joint vacuum)."""
    a, b = mode_operators(cfg)
    bd = b.conj().T.tocsr()
    chi_p = profile.chi1 * np.exp(-1j * profile.phi)
    H = chi_p * (b @ a) + profile.chi2 * (bd @ a)
    H = (H + H.conj().T).tocsr()
    jumps = [(kappa, a), (gamma_m * (n_th + 1), b), (gamma_m * n_th, bd)]
    jumps = [(rate, L, L.conj().T.tocsr()) for rate, L in jumps if rate > 0]
    # effective non-Hermitian generator: -iH - 1/2 sum rate L^dag L
    K = -1j * H
    for rate, L, Ld in jumps:
        K = K - 0.5 * rate * (Ld @ L)
    K = K.tocsr()
    Kc = K.conj().tocsr()
    jumps = [(rate, L, L.conj().tocsr()) for rate, L, _ in jumps]
    dim = a.shape[0]

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        # rho X^dag == (conj(X) rho^T)^T keeps every product sparse @ dense
        out = K @ rho + (Kc @ rho.T).T
        for rate, L, Lc in jumps:
            out += rate * (L @ (Lc @ rho.T).T)
        return out.reshape(-1)

    rho_init = fock_state(cfg, 0, 0) if rho0 is None else np.asarray(rho0, dtype=complex)
    sol = solve_ivp(rhs, (0.0, cfg.t_end), rho_init.reshape(-1), method="RK45",
                    t_eval=[cfg.t_end], rtol=cfg.rtol, atol=cfg.atol)
    if sol.status != 0:
        raise IntegrationError(f"density-matrix integration failed: {sol.message}",
                               float(sol.t[-1]) if sol.t.size else 0.0)
    rho = sol.y[:, -1].reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr - 1) > 1e-6:
        raise IntegrationError(f"trace drifted to {tr:.9f}", cfg.t_end)
    dm = DensityOperator(rho / tr, (cfg.dim_cavity, cfg.dim_mech))
    for mode in (0, 1):
        top = dm.populations(mode)[-1]
        if top > LEAK_TOL:
            raise TruncationError(
                f"population {top:.2e} in the top Fock level of mode {'ab'[mode]}; raise the truncation")
    return dm


def moments_from_dm(rho: DensityOperator, cfg: FockConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature mean and symmetrized covariance of (a, b) from a density matrix."""
    if cfg is None:
        cfg = FockConfig(*rho.dims)
    a, b = mode_operators(cfg)
    quads = []
    for c in (a, b):
        cd = c.conj().T
        quads.append((c + cd) / np.sqrt(2.0))
        quads.append((c - cd) / (1j * np.sqrt(2.0)))
    R = rho.matrix
    mean = np.array([np.trace((q @ R)).real for q in quads])
    cov = np.zeros((4, 4))
    for i, qi in enumerate(quads):
        for j, qj in enumerate(quads):
            sym = 0.5 * (qi @ qj + qj @ qi)
            cov[i, j] = np.trace(sym @ R).real - mean[i] * mean[j]
    return mean, cov


@dataclass(frozen=True)
class ConvergenceReport:
    dims: tuple[int, int]
    max_difference: float
    passed: bool
    message: str = ""


def convergence_check(profile: CouplingProfile, kappa: float, gamma_m: float, n_th: float,
                      cfg: FockConfig = FockConfig(), extra: int = 4,
                      tol: float = 1e-4) -> ConvergenceReport:
    """Compare moments at truncation N and N + ``extra``; never raises."""
    try:
        small = moments_from_dm(evolve_dm(profile, kappa, gamma_m, n_th, cfg), cfg)
        big_cfg = cfg.enlarged(extra)
        large = moments_from_dm(evolve_dm(profile, kappa, gamma_m, n_th, big_cfg), big_cfg)
    except (TruncationError, IntegrationError) as exc:
        return ConvergenceReport((cfg.dim_cavity, cfg.dim_mech), float("inf"), False, str(exc))
    diff = max(float(np.max(np.abs(small[0] - large[0]))), float(np.max(np.abs(small[1] - large[1]))))
    return ConvergenceReport((cfg.dim_cavity, cfg.dim_mech), diff, diff < tol)
