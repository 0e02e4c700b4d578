"""Self-checks run by ``optosqueeze validate``.

Each check compares a simulated quantity with an independent reference
(closed-form expression, Lyapunov solution, perturbative formula or Fock
oracle) and reports the measured error next to its tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from . import analytics, gaussian as gs
from .dynamics import CouplingProfile, DriveSpec, SystemParams, build_rwa_model, steady_state
from .errors import StabilityError
from .fock_oracle import FockConfig, convergence_check, evolve_dm, moments_from_dm
from .meanfield import fit_harmonics, integrate_meanfield
from .protocols import TwoStepSchedule, run_setup1, run_setup1_full, run_setup2

EXAMPLE = SystemParams(kappa=0.05, gamma_m=0.0, n_th=0.0, chi1=0.01, chi2=0.03)
# tunnelling far from omega_m keeps the unaddressed normal mode off resonance
SETUP2_J12 = 12.0


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    seconds: float = 0.0
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"{flag}  {self.name:<34} error={self.measured:.3e}  tol={self.tolerance:.1e}"
                f"  ({self.seconds:.1f}s){'  ' + self.detail if self.detail else ''}")


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def check_tmsv() -> tuple[float, float, str]:
    res = run_setup1(EXAMPLE, grid=2)
    err = max(abs(res.epr_min_steady - 1.0), abs(res.epr_min_final - 1.0),
              abs(res.purity_series[-1] - 1.0))
    return err, 1e-6, f"epr_min={res.epr_min_final:.9f}"


def check_thermal_grid() -> tuple[float, float, str]:
    worst = 0.0
    for ratio in np.linspace(0.1, 0.8, 5):
        for n in np.linspace(0.0, 50.0, 5):
            p = SystemParams(kappa=0.05, gamma_m=1e-4, n_th=float(n), chi1=0.03 * ratio, chi2=0.03)
            res = run_setup1(p, grid=2)
            pred = res.prediction
            st = res.steady_state
            worst = max(
                worst,
                _rel(gs.mode_occupation(st, 0), pred.occupation),
                abs(gs.cross_moment(st) - pred.cross) / abs(pred.cross),
                _rel(res.epr_min_steady, pred.epr_min),
            )
    return worst, 1e-6, "25 grid points, Lyapunov vs closed form"


def nth_root(params: SystemParams) -> float:
    """n_th at which the simulated steady epr_min crosses 2 (it is affine in n_th)."""
    e0 = run_setup1(replace(params, n_th=0.0), grid=2).epr_min_steady
    e1 = run_setup1(replace(params, n_th=100.0), grid=2).epr_min_steady
    return 100.0 * (2.0 - e0) / (e1 - e0)


def check_nth_max() -> tuple[float, float, str]:
    root = nth_root(replace(EXAMPLE, gamma_m=1e-4))
    err = max(0.0, 68.0 - root, root - 72.0)
    return err, 0.0, f"root={root:.3f}"


def check_no_cavity_loss() -> tuple[float, float, str]:
    worst = 0.0
    for n in (0.0, 1.0, 5.0):
        p = SystemParams(kappa=0.0, gamma_m=0.05, n_th=n, chi1=0.01, chi2=0.03)
        res = run_setup1(p, grid=2)
        worst = max(worst, abs(res.epr_min_steady - (4 * n + 2)), abs(res.epr_min_final - (4 * n + 2)))
    return worst, 1e-6, "kappa=0, n_th in {0,1,5}"


def check_evolve_vs_lyapunov() -> tuple[float, float, str]:
    p = replace(EXAMPLE, gamma_m=1e-3, n_th=2.0)
    res = run_setup1(p, grid=2)
    err = float(np.max(np.abs(res.final_state.cov - res.steady_state.cov)))
    return err, 1e-6, "final covariance vs Lyapunov steady state"


def check_meanfield() -> tuple[float, float, str]:
    kappa, w, g, e = 0.05, 1.0, 1e-6, 1e4
    drive = DriveSpec(e, e, omega_mod=2 * w, phi1=0.3, phi2=math.atan2(w, kappa))
    p = SystemParams(kappa=kappa, gamma_m=0.0, g=g, pump=(drive,))
    tr = integrate_meanfield(p, 600.0, grid=60001)
    q = kappa**2 + w**2
    fa = fit_harmonics(tr.times, tr.alpha[:, 0], [0.0, 2 * w, -2 * w, 4 * w], window=0.3)
    fb = fit_harmonics(tr.times, tr.beta[:, 0], [0.0, 2 * w, -2 * w], window=0.3,
                       extra={"free": lambda t: np.exp(-1j * w * t)})
    dc = -g * 2 * e**2 / (w * q)
    err = max(_rel(abs(fa[2 * w]), e / math.sqrt(q)), _rel(abs(fa[0.0]), e / math.sqrt(q)),
              abs(fb[0.0] - dc) / abs(dc))
    return err, 1e-3, f"|alpha at 2 Omega|={abs(fa[4 * w]):.3f}"


def check_fock(extra_levels: int = 0) -> tuple[float, float, str]:
    prof = CouplingProfile(0.01, 0.03)
    worst = 0.0
    cases = [(0.0, 0.0), (1e-4, 1.0)] if not extra_levels else [(0.0, 0.0), (0.0, 1.0), (1e-4, 0.0), (1e-4, 1.0)]
    cfg = FockConfig()
    for gamma_m, n in cases:
        ref = steady_state(build_rwa_model(prof, 0.05, gamma_m, n))
        mean, cov = moments_from_dm(evolve_dm(prof, 0.05, gamma_m, n, cfg), cfg)
        worst = max(worst, float(np.max(np.abs(cov - ref.cov))), float(np.max(np.abs(mean))))
        if extra_levels:
            rep = convergence_check(prof, 0.05, gamma_m, n, cfg, extra=extra_levels)
            if not rep.passed:
                return math.inf, 1e-3, f"convergence failed: {rep.message or rep.max_difference}"
    return worst, 1e-3, f"{len(cases)} cases, N={cfg.dim_cavity}"


def check_stability_gate() -> tuple[float, float, str]:
    rejected = 0
    for chi1 in (0.03, 0.05):
        p = replace(EXAMPLE, chi1=chi1)
        for run in (lambda: analytics.predict(0.05, 0.0, 0.0, p.chi1, p.chi2),
                    lambda: run_setup1(p, grid=2),
                    lambda: run_setup2(replace(p, j12=SETUP2_J12), grid=2)):
            try:
                run()
            except StabilityError:
                rejected += 1
    return float(6 - rejected), 0.0, f"{rejected}/6 rejected"


def check_properties() -> tuple[float, float, str]:
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        r, phi = rng.uniform(0, 1.5), rng.uniform(0, 2 * np.pi)
        st = gs.direct_sum(gs.thermal([rng.uniform(0, 3)]), gs.single_mode_squeezed_vacuum(gs.SqueezingParams(r, phi)))
        S = gs.passive_symplectic(np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0])
        out = gs.apply_symplectic(S, st)
        worst = max(worst, max(0.0, -gs.heisenberg_margin(out)))
        worst = max(worst, abs(gs.purity(out) - gs.purity(st)))
        back = gs.beam_splitter_5050(gs.beam_splitter_5050(out))
        worst = max(worst, float(np.max(np.abs(back.cov - out.cov))))
        ratio, gamma_m = rng.uniform(0.05, 0.95), rng.uniform(1e-6, 1e-2)
        kappa = rng.uniform(0.01, 0.2)
        rr = math.atanh(ratio)
        d0 = analytics.d0(kappa, gamma_m, analytics.transfer_rate(0.03 * ratio, 0.03))
        nmax = analytics.nth_max_setup1(rr, d0)
        worst = max(worst, abs(analytics.epr_min_setup1(rr, d0, nmax) - 2.0))
    return worst, 1e-12, "Heisenberg, purity, beam-splitter involution, threshold"


def check_rwa_ladder() -> tuple[float, float, str]:
    gaps = []
    for s in (1, 3, 10):
        p = replace(EXAMPLE, kappa=0.05 / s, chi1=0.01 / s, chi2=0.03 / s)
        gaps.append(run_setup1_full(p, grid=11).diagnostics["rwa_discrepancy"])
    monotone = gaps[0] > gaps[1] > gaps[2]
    return (gaps[0] if monotone else math.inf), 0.05, "discrepancies " + ", ".join(f"{g:.2e}" for g in gaps)


def check_two_step() -> tuple[float, float, str]:
    p = replace(EXAMPLE, j12=SETUP2_J12)
    t_min = analytics.t_min(p.kappa, analytics.transfer_rate(p.chi1, p.chi2))
    res = run_setup2(p, TwoStepSchedule.standard(p, t_switch=t_min), grid=2)
    target = 2 * math.exp(-2 * analytics.squeeze_param(p.chi1, p.chi2))
    r1 = res.diagnostics["after_step1"]["b1_r"]
    err = max(_rel(res.epr_min_final, target), _rel(r1, analytics.squeeze_param(p.chi1, p.chi2)))
    return err, 1e-2, f"epr_min={res.epr_min_final:.5f}, b1 r={r1:.5f}"


def check_single_step() -> tuple[float, float, str]:
    eprs, errs = {}, []
    for n in (0.1, 0.2):
        p = replace(EXAMPLE, gamma_m=1e-4, n_th=n, j12=SETUP2_J12)
        res = run_setup2(p, TwoStepSchedule.standard(p, single_step=True), grid=2)
        eprs[n] = res.epr_min_final
        errs.append(_rel(res.epr_min_final, res.prediction.setup2.epr_min_inf) / 0.05)
        nmax = res.prediction.setup2.nth_max
    threshold = 0.1 + 0.1 * (2.0 - eprs[0.1]) / (eprs[0.2] - eprs[0.1])
    errs.append(_rel(threshold, nmax) / 0.10)
    return max(errs), 1.0, f"threshold={threshold:.4f} vs {nmax:.4f} (error / tolerance)"


FAST = {
    "two-mode squeezed vacuum": check_tmsv,
    "thermal steady-state identities": check_thermal_grid,
    "squeezing-loss threshold near 70": check_nth_max,
    "no cavity loss gives 4 n_th + 2": check_no_cavity_loss,
    "evolve reaches Lyapunov state": check_evolve_vs_lyapunov,
    "mean field vs perturbation theory": check_meanfield,
    "Fock oracle vs Gaussian engine": check_fock,
    "stability gate": check_stability_gate,
    "property suite": check_properties,
}

FULL = {
    **FAST,
    "Fock oracle convergence N vs N+4": lambda: check_fock(extra_levels=4),
    "RWA validity ladder": check_rwa_ladder,
    "setup II two-step": check_two_step,
    "setup II single-step thermal": check_single_step,
}

LEVELS = {"fast": FAST, "full": FULL}


def run_checks(level: str = "fast", progress=None) -> list[Check]:
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}; choose fast or full")
    out = []
    for name, fn in LEVELS[level].items():
        t0 = time.perf_counter()
        try:
            err, tol, detail = fn()
            passed = err <= tol
        except Exception as exc:  # a crashing check is a failed check
            err, tol, detail, passed = math.inf, math.nan, f"{type(exc).__name__}: {exc}", False
        check = Check(name, float(err), float(tol), passed, time.perf_counter() - t0, detail)
        out.append(check)
        if progress is not None:
            progress(check)
    return out
