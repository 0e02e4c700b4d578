import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optosqueeze.dynamics import DriveSpec, SystemParams
from optosqueeze.errors import ConditionError, IntegrationError, NoSolutionError
from optosqueeze.meanfield import (
    MembraneGeometry,
    chi_from_drive,
    coupling_from_geometry,
    fit_harmonics,
    integrate_meanfield,
    perturbative_solution,
    phase_conditions,
    solve_membrane_positions,
    symmetry_residual,
)

KAPPA, W = 0.05, 1.0
LAG = math.atan2(W, KAPPA)
Q = math.sqrt(KAPPA**2 + W**2)


def pumped(e1, e2, g=1e-6, gamma_m=0.0, phi1=0.3):
    drive = DriveSpec(e1, e2, omega_mod=2 * W, phi1=phi1, phi2=LAG)
    return SystemParams(kappa=KAPPA, gamma_m=gamma_m, g=g, pump=(drive,))


@pytest.fixture(scope="module")
def example_run():
    p = pumped(1e4, 1e4)
    return p, integrate_meanfield(p, 600.0, grid=60001)


def test_no_optomechanical_coupling_leaves_mechanics_at_rest():
    tr = integrate_meanfield(pumped(0.0, 1e4, g=0.0), 400.0, grid=401)
    assert np.all(tr.beta == 0)
    assert abs(tr.alpha[-1, 0]) == pytest.approx(1e4 / Q, rel=1e-8)


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        integrate_meanfield(pumped(0.0, 1e4), 0.0)
    with pytest.raises(ValueError):
        integrate_meanfield(SystemParams(), 10.0)


def test_divergence_is_reported():
    with pytest.raises(IntegrationError) as err:
        integrate_meanfield(pumped(0.0, 1e14, g=0.0), 100.0, grid=11)
    assert err.value.t_fail < 100.0


def test_alpha_tones_match_first_order(example_run):
    p, tr = example_run
    fa = fit_harmonics(tr.times, tr.alpha[:, 0], [0.0, 2 * W, -2 * W, 4 * W], window=0.3)
    assert abs(fa[2 * W]) == pytest.approx(1e4 / Q, rel=1e-3)
    assert abs(fa[0.0]) == pytest.approx(1e4 / Q, rel=1e-3)
    # the 2 Omega tone is a second-order effect of order one
    assert 0.05 < abs(fa[4 * W]) < 5.0
    _, alpha2, _ = perturbative_solution(p, tr.times)
    assert np.max(np.abs(alpha2)) < 1e-3 * 1e4


def test_beta_dc_term(example_run):
    p, tr = example_run
    fb = fit_harmonics(tr.times, tr.beta[:, 0], [0.0, 2 * W, -2 * W], window=0.3,
                       extra={"free": lambda t: np.exp(-1j * W * t)})
    dc = -1e-6 * 2e8 / (W * Q**2)
    assert abs(fb[0.0] - dc) / abs(dc) < 1e-3
    # radiation-pressure detuning shift stays far below delta
    assert abs(2e-6 * fb[0.0].real) < 1e-3 * W


def test_alpha_follows_perturbation_theory_once_transients_decay():
    # weak mechanical damping removes the free oscillation of beta started at switch-on
    p = pumped(1e4, 1e4, gamma_m=1e-2)
    tr = integrate_meanfield(p, 800.0, grid=8001)
    a0, a2, _ = perturbative_solution(p, tr.times)
    late = tr.times > 600
    scale = np.max(np.abs(a0))
    assert np.max(np.abs(tr.alpha[late, 0] - a0[late])) / scale < 1e-3
    assert np.max(np.abs(tr.alpha[late, 0] - a0[late] - a2[late])) / scale < 1e-4


def test_beta_is_first_order_in_g():
    dcs = []
    for g in (1e-6, 2e-6):
        tr = integrate_meanfield(pumped(1e4, 1e4, g=g), 400.0, grid=20001)
        fb = fit_harmonics(tr.times, tr.beta[:, 0], [0.0, 2 * W, -2 * W], window=0.3,
                           extra={"free": lambda t: np.exp(-1j * W * t)})
        dcs.append(abs(fb[0.0]))
    assert math.log(dcs[1] / dcs[0]) / math.log(2) == pytest.approx(1.0, abs=1e-2)


def test_perturbative_solution_preconditions():
    p = pumped(1e4, 1e4)
    with pytest.raises(ConditionError):
        perturbative_solution(SystemParams(kappa=KAPPA, delta=0.9, pump=p.pump), 0.0)
    with pytest.raises(ConditionError):
        perturbative_solution(SystemParams(kappa=KAPPA, pump=(DriveSpec(1e4, 1e4, 2 * W, 0.0, 0.2),)), 0.0)
    with pytest.raises(ConditionError):
        perturbative_solution(SystemParams(kappa=KAPPA, gamma_m=0.1, pump=p.pump), 0.0)


def test_perturbative_solution_without_modulated_tone():
    t = np.linspace(0, 10, 7)
    a0, _, b1 = perturbative_solution(pumped(0.0, 1e4), t)
    assert np.allclose(a0, a0[0])
    assert np.allclose(b1, b1[0])
    assert a0[0] == pytest.approx(1e4 / Q)


def test_phase_conditions():
    p11, p12, p21, p22 = phase_conditions(KAPPA, W, 0.4)
    assert p12 == pytest.approx(1.5208379310729538)
    assert p12 == p22
    assert p21 - p11 == pytest.approx(math.pi)
    assert phase_conditions(1e9, W, 0.0)[1] == pytest.approx(0.0, abs=1e-8)
    with pytest.raises(ValueError):
        phase_conditions(0.0, W, 0.0)


def test_chi_from_drive():
    prof = chi_from_drive(1e-6, DriveSpec(1e4, 1e4, 2 * W, 0.2, LAG), KAPPA, W)
    assert prof.chi1 == pytest.approx(0.0099875234, rel=1e-8)
    assert prof.chi2 == prof.chi1
    assert prof.phi == pytest.approx(0.2 + LAG)
    assert chi_from_drive(1e-6, DriveSpec(0.0, 1e4, 2 * W, 0.0, LAG), KAPPA, W).chi1 == 0.0
    with pytest.raises(ConditionError):
        chi_from_drive(1e-6, DriveSpec(1e4, 1e4, 1.5 * W), KAPPA, W)


def test_fitted_coupling_tones_match_chi(example_run):
    p, tr = example_run
    prof = chi_from_drive(p.g, p.pump[0], KAPPA, W)
    fa = fit_harmonics(tr.times, p.g * tr.alpha[:, 0], [0.0, 2 * W], window=0.3)
    assert abs(fa[2 * W]) == pytest.approx(prof.chi1, rel=1e-3)
    assert abs(fa[0.0]) == pytest.approx(prof.chi2, rel=1e-3)


def test_fit_harmonics_recovers_synthetic_tones():
    t = np.linspace(0, 50, 5001)
    y = 2.0 * np.exp(-1j * 2 * t) + (0.5 - 1j) + 0.1 * np.exp(-0.01 * t)
    fit = fit_harmonics(t, y, [0.0, 2.0], window=1.0, extra={"decay": lambda s: np.exp(-0.01 * s)})
    assert fit[2.0] == pytest.approx(2.0)
    assert fit[0.0] == pytest.approx(0.5 - 1j)
    assert fit["decay"] == pytest.approx(0.1)


GEOM = MembraneGeometry(1.0, 1.0, (0.3, 0.3), (2 * math.pi, 3 * math.pi), (100.0, 150.0))


def test_coupling_vanishes_at_nodes_and_for_transparent_membranes():
    g = coupling_from_geometry(GEOM.with_positions(0.5, 0.5))
    assert np.allclose(g, 0.0, atol=1e-12)
    faint = MembraneGeometry(1.0, 1.0, (1e-9, 1e-9), GEOM.k_c, GEOM.omega_c, (0.1, 0.2))
    assert np.max(np.abs(coupling_from_geometry(faint))) < 1e-6


@settings(max_examples=30, deadline=None)
@given(R=st.floats(0.01, 0.99))
def test_coupling_profile_is_bounded(R):
    x = np.linspace(1e-4, 1 - 1e-4, 20001)
    geom = MembraneGeometry(1.0, 1.0, (R, R), (2 * math.pi, 3 * math.pi), (1.0, 1.0))
    f = max(np.max(np.abs(coupling_from_geometry(geom.with_positions(xi, 0.5)))) for xi in x[::50])
    assert f <= 2 * R / math.sqrt(1 - R**2) * (1 + 1e-12)


def test_membrane_positions_satisfy_symmetry():
    x1, x2 = solve_membrane_positions(GEOM)
    assert 0 < x1 < 1 and 0 < x2 < 1
    g = coupling_from_geometry(GEOM.with_positions(x1, x2))
    res = symmetry_residual(GEOM.with_positions(x1, x2))
    assert np.max(np.abs(res)) < 1e-8 * min(abs(g[0, 0]), abs(g[1, 0]))
    # the mirrored placement solves the relabelled geometry
    mirrored = symmetry_residual(GEOM.swapped().with_positions(x2, x1))
    assert np.max(np.abs(mirrored)) < 1e-8 * min(abs(g[0, 0]), abs(g[1, 0]))


def test_membrane_solver_reports_failure():
    geom = MembraneGeometry(1.0, 1.0, (0.3, 0.5), GEOM.k_c, GEOM.omega_c)
    with pytest.raises(NoSolutionError):
        solve_membrane_positions(geom, n_grid=2000)


def test_geometry_validation():
    with pytest.raises(ValueError):
        MembraneGeometry(1.0, 1.0, (1.2, 0.3), GEOM.k_c, GEOM.omega_c)
    with pytest.raises(ValueError):
        GEOM.with_positions(0.5, 1.5)
    with pytest.raises(ValueError):
        coupling_from_geometry(GEOM)
