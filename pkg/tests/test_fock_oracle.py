import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optosqueeze.dynamics import CouplingProfile, build_rwa_model, evolve, steady_state
from optosqueeze.errors import InvalidState, TruncationError
from optosqueeze.fock_oracle import (
    DensityOperator,
    FockConfig,
    convergence_check,
    evolve_dm,
    fock_state,
    moments_from_dm,
    product_thermal,
)
from optosqueeze import gaussian as gs

EXAMPLE = CouplingProfile(0.01, 0.03)


def test_config_validation():
    with pytest.raises(ValueError):
        FockConfig(dim_cavity=2)
    assert FockConfig().enlarged(4).dim_mech == 16


def test_density_operator_validation():
    cfg = FockConfig(4, 4)
    rho = fock_state(cfg, 0, 0)
    with pytest.raises(InvalidState):
        DensityOperator(2 * rho, (4, 4))
    bad = rho.copy()
    bad[0, 1] = 0.3
    with pytest.raises(InvalidState):
        DensityOperator(bad, (4, 4))


def test_vacuum_is_preserved_without_coupling():
    cfg = FockConfig(6, 6, t_end=50.0)
    dm = evolve_dm(CouplingProfile(0.0, 0.0), 0.05, 0.0, 0.0, cfg)
    assert dm.populations(0)[0] == pytest.approx(1.0)
    mean, cov = moments_from_dm(dm, cfg)
    assert np.allclose(cov, 0.5 * np.eye(4))
    assert np.allclose(mean, 0.0)


def test_single_phonon_is_drained_by_the_cavity():
    cfg = FockConfig(6, 6, t_end=800.0)
    dm = evolve_dm(CouplingProfile(0.0, 0.03), 0.05, 0.0, 0.0, cfg, rho0=fock_state(cfg, 0, 1))
    n_a = np.dot(np.arange(6), dm.populations(0))
    n_b = np.dot(np.arange(6), dm.populations(1))
    assert n_a + n_b < 1e-6


def test_thermal_moments():
    cfg = FockConfig(6, 40)
    dm = DensityOperator(product_thermal(cfg, 0.0, 1.0), (6, 40))
    _, cov = moments_from_dm(dm, cfg)
    assert np.allclose(cov[:2, :2], 0.5 * np.eye(2))
    assert np.allclose(cov[2:, 2:], 1.5 * np.eye(2), atol=1e-5)


def test_steady_squeezed_mechanics():
    cfg = FockConfig()
    dm = evolve_dm(EXAMPLE, 0.05, 0.0, 0.0, cfg)
    mean, cov = moments_from_dm(dm, cfg)
    variances = np.linalg.eigvalsh(cov[2:, 2:])
    assert np.allclose(variances, [0.25, 1.0], atol=1e-3)
    ref = steady_state(build_rwa_model(EXAMPLE, 0.05, 0.0, 0.0))
    assert np.max(np.abs(cov - ref.cov)) < 1e-3
    assert dm.purity() == pytest.approx(gs.purity(ref), abs=1e-3)
    assert dm.purity() == pytest.approx(1.0, abs=1e-3)
    assert dm.min_eigenvalue() > -1e-8


def test_trivial_convergence_without_coupling():
    cfg = FockConfig(6, 6, t_end=20.0)
    rep = convergence_check(CouplingProfile(0.0, 0.0), 0.05, 0.0, 0.0, cfg)
    assert rep.passed
    assert rep.max_difference < 1e-12


def test_strong_squeezing_flags_truncation():
    rep = convergence_check(CouplingProfile(0.027, 0.03), 0.05, 0.0, 0.0, FockConfig())
    assert not rep.passed
    assert "top Fock level" in rep.message
    with pytest.raises(TruncationError):
        evolve_dm(CouplingProfile(0.027, 0.03), 0.05, 0.0, 0.0, FockConfig(8, 8, t_end=300.0))


# thermal tails must stay below the leak threshold at 10 levels
@settings(max_examples=5, deadline=None)
@given(chi1=st.floats(0.0, 0.015), n_th=st.floats(0.0, 0.2), t_end=st.floats(5.0, 40.0))
def test_fock_moments_track_gaussian_dynamics(chi1, n_th, t_end):
    prof = CouplingProfile(chi1, 0.03)
    cfg = FockConfig(10, 10, t_end=t_end)
    rho0 = product_thermal(cfg, 0.0, n_th)
    dm = evolve_dm(prof, 0.05, 0.01, n_th, cfg, rho0=rho0)
    assert abs(np.trace(dm.matrix).real - 1) < 1e-10
    assert dm.min_eigenvalue() > -1e-8
    mean, cov = moments_from_dm(dm, cfg)
    start = gs.direct_sum(gs.vacuum(1), gs.thermal([n_th]))
    ref = evolve(build_rwa_model(prof, 0.05, 0.01, n_th), start, (0.0, t_end)).final
    assert np.max(np.abs(cov - ref.cov)) < 1e-3
