"""Multimode Gaussian states in the quadrature picture.

Conventions: hbar = 1, x = (c + c^dag)/sqrt(2), p = (c - c^dag)/(i sqrt(2)),
quadrature ordering (x1, p1, ..., xN, pN). The vacuum covariance is I/2, so a
two-mode EPR variance below 2 certifies nonclassical correlations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidState, NotSymplecticError

TWO_PI = 2.0 * np.pi
HEISENBERG_TOL = 1e-9
SYMPLECTIC_TOL = 1e-9


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form for the (x1, p1, ..., xN, pN) ordering."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True, eq=False)
class GaussianState:
    """First and second moments of an N-mode Gaussian state.

    ``cov`` holds the symmetrized fluctuations 1/2 <{dR_i, dR_j}>. It is
    symmetrized on construction; ``check=False`` skips the Heisenberg test
    (used internally for intermediate integrator output).
    """

    mean: np.ndarray
    cov: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        mean = np.array(self.mean, dtype=float).reshape(-1)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise InvalidState(f"covariance must be 2N x 2N, got shape {cov.shape}")
        if mean.shape[0] != cov.shape[0]:
            raise InvalidState("mean and covariance dimensions differ")
        cov = 0.5 * (cov + cov.T)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        if self.check:
            margin = heisenberg_margin(self)
            if margin < -HEISENBERG_TOL:
                raise InvalidState(f"covariance violates the uncertainty principle (margin {margin:.3e})")

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2


@dataclass(frozen=True)
class SqueezingParams:
    """Squeeze magnitude ``r`` and phase ``phi``; complex parameter xi = r e^{-i phi}."""

    r: float
    phi: float = 0.0

    def __post_init__(self):
        if not self.r >= 0:
            raise ValueError(f"squeeze magnitude must be nonnegative, got {self.r}")
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)

    @property
    def xi(self) -> complex:
        return self.r * np.exp(-1j * self.phi)


def heisenberg_margin(state: GaussianState) -> float:
    """Smallest eigenvalue of cov + (i/2) Omega; nonnegative for physical states."""
    herm = state.cov + 0.5j * symplectic_form(state.n_modes)
    return float(np.linalg.eigvalsh(herm)[0])


def vacuum(n_modes: int) -> GaussianState:
    if n_modes < 1:
        raise ValueError("a state needs at least one mode")
    return GaussianState(np.zeros(2 * n_modes), 0.5 * np.eye(2 * n_modes))


def thermal(occupations) -> GaussianState:
    """Product of thermal states with the given mean occupations."""
    occ = np.atleast_1d(np.asarray(occupations, dtype=float))
    if np.any(occ < 0):
        raise ValueError("thermal occupations must be nonnegative")
    return GaussianState(np.zeros(2 * occ.size), np.diag(np.repeat(occ + 0.5, 2)))


def direct_sum(*states: GaussianState) -> GaussianState:
    """Product state of independent subsystems, modes concatenated in order."""
    mean = np.concatenate([s.mean for s in states])
    dim = mean.size
    cov = np.zeros((dim, dim))
    i = 0
    for s in states:
        k = s.cov.shape[0]
        cov[i:i + k, i:i + k] = s.cov
        i += k
    return GaussianState(mean, cov)


def reduced(state: GaussianState, modes) -> GaussianState:
    """Marginal state of the listed modes (0-based), in the listed order."""
    idx = np.ravel([[2 * m, 2 * m + 1] for m in modes])
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)], check=state.check)


def is_symplectic(S: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    W = symplectic_form(S.shape[0] // 2)
    return float(np.max(np.abs(S @ W @ S.T - W))) <= tol


def apply_symplectic(S: np.ndarray, state: GaussianState) -> GaussianState:
    S = np.asarray(S, dtype=float)
    if S.shape != state.cov.shape:
        raise ValueError(f"map of shape {S.shape} does not match a {state.n_modes}-mode state")
    W = symplectic_form(state.n_modes)
    deviation = float(np.max(np.abs(S @ W @ S.T - W)))
    if deviation > SYMPLECTIC_TOL:
        raise NotSymplecticError(deviation)
    return GaussianState(S @ state.mean, S @ state.cov @ S.T)


def rotation(theta: float) -> np.ndarray:
    """Single-mode phase rotation c -> c e^{-i theta}."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def passive_symplectic(U) -> np.ndarray:
    """Quadrature map of the passive mode transformation c' = U c (U unitary)."""
    U = np.asarray(U, dtype=complex)
    n = U.shape[0]
    S = np.zeros((2 * n, 2 * n))
    S[0::2, 0::2] = U.real
    S[0::2, 1::2] = -U.imag
    S[1::2, 0::2] = U.imag
    S[1::2, 1::2] = U.real
    return S


BEAM_SPLITTER_5050 = passive_symplectic(np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0))


def beam_splitter_5050(state: GaussianState) -> GaussianState:
    """Map (c1, c2) -> ((c1 + c2)/sqrt 2, (c1 - c2)/sqrt 2). An involution."""
    if state.n_modes != 2:
        raise ValueError(f"the 50:50 beam splitter acts on 2 modes, got {state.n_modes}")
    return apply_symplectic(BEAM_SPLITTER_5050, state)


def squeeze_matrix(params: SqueezingParams) -> np.ndarray:
    """Symplectic matrix of the single-mode squeezer S(xi), xi = r e^{-i phi}.

    Squeezes the quadrature at angle phi/2, so that on the vacuum
    <b^2> = -sinh(2r) e^{i phi} / 2.
    """
    R = rotation(-params.phi / 2)
    return R @ np.diag([np.exp(-params.r), np.exp(params.r)]) @ R.T


def single_mode_squeezed_vacuum(params: SqueezingParams) -> GaussianState:
    return apply_symplectic(squeeze_matrix(params), vacuum(1))


def two_mode_squeezed_vacuum(params: SqueezingParams) -> GaussianState:
    """S12(xi)|0,0> with <c1 c2> = -sinh(2r) e^{i phi} / 2."""
    r, phi = params.r, params.phi
    N = np.sinh(r) ** 2 * np.eye(2)
    m = -0.5 * np.sinh(2 * r) * np.exp(1j * phi)
    M = np.array([[0.0, m], [m, 0.0]])
    return state_from_moments(N, M)


def state_from_moments(N, M, mean=None) -> GaussianState:
    """Build a state from normally ordered fluctuation moments.

    N[j, k] = <dc_j^dag dc_k>, M[j, k] = <dc_j dc_k>; ``mean`` holds the
    complex amplitudes <c_j> (default zero).
    """
    N = np.atleast_2d(np.asarray(N, dtype=complex))
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    n = N.shape[0]
    I = np.eye(n)
    cov = np.zeros((2 * n, 2 * n))
    cov[0::2, 0::2] = (M + N).real + 0.5 * I
    cov[1::2, 1::2] = (N - M).real + 0.5 * I
    cov[0::2, 1::2] = (M + N).imag
    cov[1::2, 0::2] = (M - N).imag
    vec = np.zeros(2 * n)
    if mean is not None:
        amp = np.atleast_1d(np.asarray(mean, dtype=complex))
        vec[0::2] = np.sqrt(2.0) * amp.real
        vec[1::2] = np.sqrt(2.0) * amp.imag
    return GaussianState(vec, cov)


def moments(state: GaussianState) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`state_from_moments`: fluctuation moments (N, M)."""
    V = state.cov
    n = state.n_modes
    Vxx, Vpp = V[0::2, 0::2], V[1::2, 1::2]
    Vxp, Vpx = V[0::2, 1::2], V[1::2, 0::2]
    N = 0.5 * (Vxx + Vpp) - 0.5 * np.eye(n) + 0.5j * (Vxp - Vpx)
    M = 0.5 * (Vxx - Vpp) + 0.5j * (Vxp + Vpx)
    return N, M


def amplitudes(state: GaussianState) -> np.ndarray:
    """Complex mean amplitudes <c_j>."""
    return (state.mean[0::2] + 1j * state.mean[1::2]) / np.sqrt(2.0)


def mode_occupation(state: GaussianState, j: int) -> float:
    if not 0 <= j < state.n_modes:
        raise IndexError(f"mode {j} out of range for {state.n_modes} modes")
    V, m = state.cov, state.mean
    return float(0.5 * (V[2 * j, 2 * j] + V[2 * j + 1, 2 * j + 1] - 1.0)
                 + 0.5 * (m[2 * j] ** 2 + m[2 * j + 1] ** 2))


def cross_moment(state: GaussianState, j: int = 0, k: int = 1) -> complex:
    """<c_j c_k> including the coherent part."""
    _, M = moments(state)
    amp = amplitudes(state)
    return complex(M[j, k] + amp[j] * amp[k])


def purity(state: GaussianState) -> float:
    """tr(rho^2) = 1 / (2^N sqrt(det cov))."""
    sign, logdet = np.linalg.slogdet(state.cov)
    if sign <= 0:
        raise InvalidState("covariance is not positive definite")
    return float(np.exp(-state.n_modes * np.log(2.0) - 0.5 * logdet))


def principal_variances(state: GaussianState) -> np.ndarray:
    """Sorted eigenvalues of a single-mode covariance."""
    if state.n_modes != 1:
        raise ValueError("principal variances are defined for one mode")
    return np.linalg.eigvalsh(state.cov)


def squeeze_parameter(state: GaussianState) -> float:
    """Effective squeeze magnitude r = ln(V_max / V_min) / 4 of a single mode."""
    lo, hi = principal_variances(state)
    return float(0.25 * np.log(hi / lo))


def _epr_vectors(theta1: float, theta2: float) -> tuple[np.ndarray, np.ndarray]:
    c1, s1, c2, s2 = np.cos(theta1), np.sin(theta1), np.cos(theta2), np.sin(theta2)
    # X^theta = x cos(theta) + p sin(theta); X^(theta + pi/2) = -x sin + p cos
    u = np.array([c1, s1, c2, s2])
    v = np.array([-s1, c1, s2, -c2])
    return u, v


def epr_variance(state: GaussianState, theta1: float, theta2: float) -> float:
    """Var(X1^t1 + X2^t2) + Var(X1^(t1+pi/2) - X2^(t2+pi/2))."""
    if state.n_modes != 2:
        raise ValueError("the EPR variance is defined for two modes")
    u, v = _epr_vectors(theta1, theta2)
    V = state.cov
    return float(u @ V @ u + v @ V @ v)


def epr_min(state: GaussianState, n_grid: int = 64) -> tuple[float, float, float]:
    """Minimize the EPR variance over the local phases.

    Coarse ``n_grid`` x ``n_grid`` scan followed by Nelder-Mead refinement.
    Returns (value, theta1, theta2) with the phases reduced mod 2 pi.
    """
    if state.n_modes != 2:
        raise ValueError("the EPR variance is defined for two modes")
    V = state.cov
    th = np.arange(n_grid) * (TWO_PI / n_grid)
    c, s = np.cos(th), np.sin(th)
    # quadratic forms for all grid pairs at once
    U = np.zeros((n_grid, n_grid, 4))
    W = np.zeros((n_grid, n_grid, 4))
    U[..., 0], U[..., 1] = c[:, None], s[:, None]
    U[..., 2], U[..., 3] = c[None, :], s[None, :]
    W[..., 0], W[..., 1] = -s[:, None], c[:, None]
    W[..., 2], W[..., 3] = s[None, :], -c[None, :]
    vals = np.einsum("abi,ij,abj->ab", U, V, U) + np.einsum("abi,ij,abj->ab", W, V, W)
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    res = minimize(lambda t: epr_variance(state, t[0], t[1]), x0=[th[i], th[j]],
                   method="Nelder-Mead",
                   options={"xatol": 1e-11, "fatol": 1e-15, "maxiter": 4000})
    best = min(float(res.fun), float(vals[i, j]))
    t1, t2 = (res.x if res.fun <= vals[i, j] else (th[i], th[j]))
    return best, float(t1 % TWO_PI), float(t2 % TWO_PI)


def to_rotating_frame(state: GaussianState, t: float, freqs) -> GaussianState:
    """Undo free rotation: c_rot = c_lab e^{+i w t} for each mode frequency w."""
    blocks = [rotation(-w * t) for w in np.broadcast_to(freqs, (state.n_modes,))]
    S = np.zeros_like(state.cov)
    for k, B in enumerate(blocks):
        S[2 * k:2 * k + 2, 2 * k:2 * k + 2] = B
    return GaussianState(S @ state.mean, S @ state.cov @ S.T, check=state.check)
