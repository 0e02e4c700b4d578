import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import block_diag

from optosqueeze import gaussian as gs
from optosqueeze.errors import InvalidState, NotSymplecticError

R_DEMO = math.atanh(1 / 3)  # e^{-2r} = 1/2

radii = st.floats(0.0, 1.5)
angles = st.floats(0.0, 2 * math.pi)
occupations = st.floats(0.0, 5.0)


def random_unitary(seed: int, n: int = 2) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def tmsv_ket(r: float, phi: float, dim: int) -> np.ndarray:
    """Fock-basis two-mode squeezed vacuum with <c1 c2> = -sinh(2r) e^{i phi} / 2."""
    psi = np.zeros(dim * dim, dtype=complex)
    lam = -np.exp(1j * phi) * np.tanh(r)
    for n in range(dim):
        psi[n * dim + n] = lam**n / np.cosh(r)
    return psi / np.linalg.norm(psi)


def fock_epr_variance(psi: np.ndarray, dim: int, theta1: float, theta2: float) -> float:
    """Var(X1 + X2) + Var(P1 - P2) with X^theta = x cos theta + p sin theta."""
    a = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    eye = np.eye(dim)
    c1, c2 = np.kron(a, eye), np.kron(eye, a)

    def quad(c, th):
        x = (c + c.conj().T) / math.sqrt(2)
        p = (c - c.conj().T) / (1j * math.sqrt(2))
        return x * math.cos(th) + p * math.sin(th), -x * math.sin(th) + p * math.cos(th)

    X1, P1 = quad(c1, theta1)
    X2, P2 = quad(c2, theta2)

    def var(op):
        m = np.vdot(psi, op @ psi).real
        return np.vdot(psi, op @ (op @ psi)).real - m**2

    return var(X1 + X2) + var(P1 - P2)


def test_vacuum_and_thermal():
    v = gs.vacuum(2)
    assert np.allclose(v.cov, 0.5 * np.eye(4))
    assert gs.purity(v) == pytest.approx(1.0)
    th = gs.thermal([1.0, 0.0])
    assert np.allclose(th.cov[:2, :2], 1.5 * np.eye(2))
    assert gs.mode_occupation(th, 0) == pytest.approx(1.0)
    assert gs.purity(th) == pytest.approx(1 / 3)


def test_state_rejects_unphysical_covariance():
    with pytest.raises(InvalidState):
        gs.GaussianState(np.zeros(2), 0.1 * np.eye(2))
    with pytest.raises(ValueError):
        gs.GaussianState(np.zeros(3), np.eye(3))


def test_state_arrays_are_read_only():
    v = gs.vacuum(1)
    with pytest.raises(ValueError):
        v.cov[0, 0] = 3.0


def test_symplectic_form():
    W = gs.symplectic_form(2)
    assert np.allclose(W @ W, -np.eye(4))
    assert np.allclose(W.T, -W)


def test_apply_rejects_non_symplectic():
    with pytest.raises(NotSymplecticError):
        gs.apply_symplectic(np.diag([2.0, 2.0]), gs.vacuum(1))


def test_single_mode_squeezed_moments():
    r, phi = 0.7, 1.1
    s = gs.single_mode_squeezed_vacuum(gs.SqueezingParams(r, phi))
    N, M = gs.moments(s)
    assert N[0, 0].real == pytest.approx(math.sinh(r) ** 2)
    assert M[0, 0] == pytest.approx(-0.5 * math.sinh(2 * r) * np.exp(1j * phi))
    assert gs.squeeze_parameter(s) == pytest.approx(r)
    assert np.allclose(gs.principal_variances(s), [0.5 * math.exp(-2 * r), 0.5 * math.exp(2 * r)])


def test_squeezing_phase_is_reduced():
    p = gs.SqueezingParams(0.3, 7.0)
    assert 0 <= p.phi < 2 * math.pi
    assert p.phi == pytest.approx(7.0 - 2 * math.pi)
    assert p.xi == pytest.approx(0.3 * np.exp(-1j * p.phi))


def test_tmsv_moments_and_marginals():
    r, phi = 0.4, 0.9
    s = gs.two_mode_squeezed_vacuum(gs.SqueezingParams(r, phi))
    assert gs.cross_moment(s) == pytest.approx(-0.5 * math.sinh(2 * r) * np.exp(1j * phi))
    for j in (0, 1):
        m = gs.reduced(s, [j])
        assert np.allclose(m.cov, (math.sinh(r) ** 2 + 0.5) * np.eye(2))
    assert gs.purity(s) == pytest.approx(1.0)


def test_tmsv_is_beam_splitter_of_perpendicular_squeezers():
    r, phi = 0.5, 0.3
    pair = gs.direct_sum(gs.single_mode_squeezed_vacuum(gs.SqueezingParams(r, phi)),
                         gs.single_mode_squeezed_vacuum(gs.SqueezingParams(r, phi + math.pi)))
    out = gs.beam_splitter_5050(pair)
    ref = gs.two_mode_squeezed_vacuum(gs.SqueezingParams(r, phi))
    assert np.allclose(out.cov, ref.cov, atol=1e-12)


def test_epr_variance_of_tmsv_against_fock_oracle():
    dim = 30
    psi = tmsv_ket(R_DEMO, 0.0, dim)
    s = gs.two_mode_squeezed_vacuum(gs.SqueezingParams(R_DEMO, 0.0))
    # aligned quadratures give the squeezed value; a quarter turn gives 2 cosh 2r, not 2 e^{2r}
    for th1, th2, expected in [(0.0, 0.0, 1.0), (0.0, math.pi / 2, 2.5), (math.pi / 2, math.pi / 2, 4.0)]:
        assert gs.epr_variance(s, th1, th2) == pytest.approx(expected, abs=1e-12)
        assert fock_epr_variance(psi, dim, th1, th2) == pytest.approx(expected, abs=1e-9)


def test_epr_min_of_tmsv():
    phi = 1.3
    s = gs.two_mode_squeezed_vacuum(gs.SqueezingParams(R_DEMO, phi))
    value, th1, th2 = gs.epr_min(s)
    assert value == pytest.approx(1.0, abs=1e-10)
    d = (th1 + th2 - phi) % (2 * math.pi)
    assert min(d, 2 * math.pi - d) < 1e-5


def test_epr_min_of_vacuum_and_thermal():
    assert gs.epr_min(gs.vacuum(2))[0] == pytest.approx(2.0)
    assert gs.epr_min(gs.thermal([1.0, 1.0]))[0] == pytest.approx(6.0)


def test_state_from_moments_round_trip():
    s = gs.two_mode_squeezed_vacuum(gs.SqueezingParams(0.6, 2.0))
    N, M = gs.moments(s)
    back = gs.state_from_moments(N, M)
    assert np.allclose(back.cov, s.cov)


def test_rotating_frame_inverts():
    s = gs.two_mode_squeezed_vacuum(gs.SqueezingParams(0.6, 2.0))
    there = gs.to_rotating_frame(s, 3.7, [1.0, 1.5])
    back = gs.to_rotating_frame(there, -3.7, [1.0, 1.5])
    assert np.allclose(back.cov, s.cov)
    # equal frequencies rotate the cross moment by e^{2 i w t}
    t = 0.4
    rot = gs.to_rotating_frame(s, t, [1.0, 1.0])
    assert gs.cross_moment(rot) == pytest.approx(gs.cross_moment(s) * np.exp(2j * t))


def test_purity_of_minimum_uncertainty_state():
    s = gs.GaussianState(np.zeros(2), np.diag([0.5, 0.5]))
    assert gs.purity(s) == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(r=radii, phi=angles, n=occupations, seed=st.integers(0, 2**31 - 1))
def test_heisenberg_bound_and_purity_under_symplectic_maps(r, phi, n, seed):
    s = gs.direct_sum(gs.thermal([n]), gs.single_mode_squeezed_vacuum(gs.SqueezingParams(r, phi)))
    S = gs.passive_symplectic(random_unitary(seed))
    out = gs.apply_symplectic(S, s)
    assert gs.heisenberg_margin(out) >= -gs.HEISENBERG_TOL
    assert gs.purity(out) == pytest.approx(gs.purity(s), rel=1e-9)
    sq = gs.apply_symplectic(block_diag(gs.squeeze_matrix(gs.SqueezingParams(r, phi)), np.eye(2)), out)
    assert gs.heisenberg_margin(sq) >= -gs.HEISENBERG_TOL


@settings(max_examples=40, deadline=None)
@given(r=radii, phi=angles, n1=occupations, n2=occupations)
def test_beam_splitter_is_involution(r, phi, n1, n2):
    S = gs.squeeze_matrix(gs.SqueezingParams(r, phi))
    s = gs.apply_symplectic(block_diag(S, S.T), gs.thermal([n1, n2]))
    twice = gs.beam_splitter_5050(gs.beam_splitter_5050(s))
    assert np.allclose(twice.cov, s.cov, atol=1e-10)
    assert gs.is_symplectic(gs.BEAM_SPLITTER_5050)


@settings(max_examples=40, deadline=None)
@given(r=radii, phi=angles, th1=angles, th2=angles)
def test_epr_min_bounds_every_angle_pair(r, phi, th1, th2):
    s = gs.two_mode_squeezed_vacuum(gs.SqueezingParams(r, phi))
    value = gs.epr_min(s)[0]
    assert value <= gs.epr_variance(s, th1, th2) + 1e-10
    assert value == pytest.approx(2 * math.exp(-2 * r), rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(r=radii, phi=angles)
def test_squeeze_matrix_is_symplectic(r, phi):
    S = gs.squeeze_matrix(gs.SqueezingParams(r, phi))
    assert gs.is_symplectic(S)
    assert np.linalg.det(S) == pytest.approx(1.0)
