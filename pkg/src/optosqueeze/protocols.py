"""End-to-end simulations of the two squeezing setups.

Setup I: two membranes in a two-mode cavity. The normal modes b_{1,2} of the
membranes decouple into two cavity-mechanics subsystems; each is driven into a
single-mode squeezed state and a 50:50 recombination gives the two-mode state
of the membranes (c1, c2).

Setup II: two single-mode cavities coupled by photon tunnelling j12, each
holding one membrane. A single drive can address only one normal mode at a
time, so the protocol switches the laser detuning and phase at ``t_switch``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import analytics
from .dynamics import (
    CouplingProfile,
    LinearDynamics,
    SystemParams,
    build_full_model,
    build_rwa_model,
    build_two_cavity_model,
    evolve,
    normal_mode_map,
    slowest_rate,
    stability_eigenvalues,
    steady_state,
)
from .errors import ConditionError, OptoSqueezeError, StabilityError
from .gaussian import (
    GaussianState,
    apply_symplectic,
    beam_splitter_5050,
    cross_moment,
    direct_sum,
    epr_min,
    mode_occupation,
    purity,
    reduced,
    squeeze_parameter,
    thermal,
    to_rotating_frame,
    vacuum,
)

PHASE_TOL = 1e-9
SETTLE_FACTOR = 15.0


@dataclass
class ProtocolResult:
    """Time series of the membrane pair (c1, c2) plus analytic reference values.

    Cross moments are reported in the frame rotating at omega_m.
    """

    setup: str
    times: np.ndarray
    epr_min_series: np.ndarray
    occupations: np.ndarray
    cross_moment: np.ndarray
    purity_series: np.ndarray
    final_state: GaussianState
    prediction: analytics.AnalyticPrediction | None
    schedule: list = field(default_factory=list)
    steady_state: GaussianState | None = None
    epr_min_steady: float | None = None
    diagnostics: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    regime: str | None = None

    @property
    def epr_min_final(self) -> float:
        return float(self.epr_min_series[-1])

    def summary(self) -> dict:
        pred = self.prediction
        ref = None
        if pred is not None:
            ref = pred.setup2.epr_min_inf if (self.setup == "setup2" and pred.setup2 is not None
                                              and self.regime == "single-step") else pred.epr_min
        out = {
            "epr_min": self.epr_min_final,
            "epr_min_steady": self.epr_min_steady,
            "epr_min_predicted": ref,
            "deviation": None if ref is None else self.epr_min_final - ref,
            "n_c1": float(self.occupations[-1, 0]),
            "n_c2": float(self.occupations[-1, 1]),
            "re_c1c2": float(self.cross_moment[-1].real),
            "im_c1c2": float(self.cross_moment[-1].imag),
            "purity": float(self.purity_series[-1]),
        }
        for key in ("epr_min_full_avg", "epr_min_rwa", "rwa_discrepancy"):
            if key in self.diagnostics:
                out[key] = self.diagnostics[key]
        return out


def _metrics(states: list[GaussianState]):
    eprs, occ, cross, pur = [], [], [], []
    for s in states:
        eprs.append(epr_min(s)[0])
        occ.append((mode_occupation(s, 0), mode_occupation(s, 1)))
        cross.append(cross_moment(s, 0, 1))
        pur.append(purity(s))
    return np.array(eprs), np.array(occ), np.array(cross), np.array(pur)


def _grid(t_end: float, grid) -> np.ndarray:
    if np.isscalar(grid):
        n = int(grid)
        if n < 1:
            raise ValueError("output grid needs at least one point")
        return np.linspace(0.0, t_end, n) if n > 1 else np.array([t_end])
    g = np.asarray(grid, dtype=float)
    if g.size == 0:
        raise ValueError("output grid needs at least one point")
    return g


def _phase_diff_is_pi(phi1: float, phi2: float) -> bool:
    d = (phi2 - phi1 - math.pi) % (2 * math.pi)
    return min(d, 2 * math.pi - d) < PHASE_TOL


def setup1_profiles(params: SystemParams) -> tuple[CouplingProfile, CouplingProfile]:
    """Coupling profiles of the two normal-mode subsystems.

    With two pump drives the profiles come from the mean-field map and must
    satisfy equal squeezing and perpendicular phases; otherwise the second
    profile is the first one shifted by pi.
    """
    if params.pump:
        from .meanfield import chi_from_drive

        if len(params.pump) != 2:
            raise ConditionError("setup I needs exactly two pump drives")
        p1, p2 = (chi_from_drive(params.g, d, params.kappa, params.omega_m, params.detuning)
                  for d in params.pump)
        for p in (p1, p2):
            analytics._check_stable(p.chi1, p.chi2)
        if abs(p1.chi1 * p2.chi2 - p2.chi1 * p1.chi2) > PHASE_TOL * p1.chi2 * p2.chi2:
            raise ConditionError("drives give unequal squeeze parameters r1 != r2")
        if not _phase_diff_is_pi(p1.phi, p2.phi):
            raise ConditionError(
                f"drive phases break phi1 = phi2 - pi (phi1={p1.phi:.6g}, phi2={p2.phi:.6g})")
        return p1, p2
    analytics._check_stable(params.chi1, params.chi2)
    p1 = params.profile()
    return p1, p1.shifted(math.pi)


def _check_resonance(params: SystemParams) -> None:
    w = params.omega_m
    if abs(params.detuning - w) > 1e-12 * w or abs(params.modulation - 2 * w) > 1e-12 * w:
        raise ConditionError("setup I requires delta = omega_m and Omega = 2 omega_m")


def _prediction(params: SystemParams, phi: float, with_setup2: bool = False):
    try:
        return analytics.predict(params.kappa, params.gamma_m, params.n_th, params.chi1,
                                 params.chi2, phi, with_setup2=with_setup2)
    except StabilityError:
        raise
    except ValueError:
        return None


def _initial_subsystem(params: SystemParams) -> GaussianState:
    return direct_sum(vacuum(1), thermal(params.n_th))


def _combine_normal_modes(b1: GaussianState, b2: GaussianState) -> GaussianState:
    return beam_splitter_5050(direct_sum(b1, b2))


def _settle_time(models: list[LinearDynamics]) -> float:
    rate = min(slowest_rate(m) for m in models)
    if rate <= 0:
        raise StabilityError("drift has an undamped mode; no steady state to settle into")
    return SETTLE_FACTOR / rate


def run_setup1(params: SystemParams, t_end: float | None = None, grid=201,
               initial: GaussianState | None = None) -> ProtocolResult:
    """Setup I in the rotating-wave approximation.

    ``initial`` is the state of one (cavity, normal mode) subsystem, used for
    both; by default cavity vacuum and thermal mechanics.
    """
    p1, p2 = setup1_profiles(params)
    _check_resonance(params)
    models = [build_rwa_model(p, params.kappa, params.gamma_m, params.n_th) for p in (p1, p2)]
    for m in models:
        eig = stability_eigenvalues(m)
        worst = eig[np.argmax(eig.real)]
        if worst.real >= 0:
            raise StabilityError(f"drift is not Hurwitz: eigenvalue {worst:.6g}", complex(worst))
    if t_end is None:
        t_end = _settle_time(models)
    times = _grid(t_end, grid)
    start = _initial_subsystem(params) if initial is None else initial
    trajs = [evolve(m, start, (0.0, float(times[-1])), times) for m in models]
    states = [
        _combine_normal_modes(reduced(trajs[0][k], [1]), reduced(trajs[1][k], [1]))
        for k in range(len(times))
    ]
    eprs, occ, cross, pur = _metrics(states)
    steady = _combine_normal_modes(*(reduced(steady_state(m), [1]) for m in models))
    e_steady, th1, th2 = epr_min(steady)
    return ProtocolResult(
        setup="setup1_rwa", times=trajs[0].times, epr_min_series=eprs, occupations=occ,
        cross_moment=cross, purity_series=pur, final_state=states[-1],
        prediction=_prediction(params, p1.phi), schedule=[(0.0, p1), (0.0, p2)],
        steady_state=steady, epr_min_steady=e_steady,
        diagnostics={"theta_sum": (th1 + th2) % (2 * math.pi), "phi": p1.phi},
    )


def run_setup1_full(params: SystemParams, t_end: float | None = None, grid=201,
                    samples_per_period: int = 64) -> ProtocolResult:
    """Setup I without the rotating-wave approximation.

    Integrates the lab-frame periodic model of each subsystem, reports the
    (c1, c2) state in the frame rotating at omega_m, and averages epr_min over
    the last modulation period. The RWA steady value is attached for comparison.
    """
    p1, p2 = setup1_profiles(params)
    _check_resonance(params)
    rwa = [build_rwa_model(p, params.kappa, params.gamma_m, params.n_th) for p in (p1, p2)]
    if t_end is None:
        t_end = _settle_time(rwa)
    period = 2 * math.pi / params.modulation
    models = [build_full_model(p, params.detuning, params.omega_m, params.kappa,
                               params.gamma_m, params.n_th) for p in (p1, p2)]
    base = _grid(t_end, grid)
    tail = t_end - period + period * np.arange(samples_per_period) / samples_per_period
    times = np.union1d(base, tail[tail >= 0])
    start = _initial_subsystem(params)
    trajs = [evolve(m, start, (0.0, float(times[-1])), times) for m in models]
    freqs = (params.detuning, params.omega_m)
    states = []
    for k, t in enumerate(times):
        b = [reduced(to_rotating_frame(tr[k], t, freqs), [1]) for tr in trajs]
        states.append(_combine_normal_modes(*b))
    eprs, occ, cross, pur = _metrics(states)
    in_tail = np.isin(times, tail)
    full_avg = float(np.mean(eprs[in_tail]))
    rwa_steady = _combine_normal_modes(*(reduced(steady_state(m), [1]) for m in rwa))
    e_rwa = epr_min(rwa_steady)[0]
    keep = np.isin(times, base)
    return ProtocolResult(
        setup="setup1_full", times=times[keep], epr_min_series=eprs[keep], occupations=occ[keep],
        cross_moment=cross[keep], purity_series=pur[keep], final_state=states[-1],
        prediction=_prediction(params, p1.phi), schedule=[(0.0, p1), (0.0, p2)],
        steady_state=rwa_steady, epr_min_steady=e_rwa,
        diagnostics={
            "epr_min_full_avg": full_avg,
            "epr_min_rwa": e_rwa,
            "rwa_discrepancy": abs(full_avg - e_rwa) / e_rwa,
            "epr_min_tail": eprs[in_tail],
        },
    )


@dataclass(frozen=True)
class DriveStep:
    """Laser setting of one protocol step: cavity-laser detuning plus coupling."""

    delta: float
    profile: CouplingProfile
    target_mode: int

    def laser_phases(self, kappa: float, omega_m: float) -> tuple[float, float]:
        """Pump phases (varphi1, varphi2) realizing ``profile.phi`` on resonance."""
        lag = math.atan2(omega_m, kappa)
        return (self.profile.phi - lag) % (2 * math.pi), lag


@dataclass(frozen=True)
class TwoStepSchedule:
    step1: DriveStep
    step2: DriveStep | None
    t_switch: float

    def __post_init__(self):
        if not self.t_switch > 0:
            raise ValueError("t_switch must be positive")

    @classmethod
    def standard(cls, params: SystemParams, t_switch: float | None = None, safety: float = 3.0,
                 first_mode: int = 1, single_step: bool = False) -> "TwoStepSchedule":
        """Two-step drive: address one normal mode, then the other with phi + pi.

        Step resonant with mode 1 sets delta + j12 = omega_m; with mode 2,
        delta - j12 = omega_m. ``t_switch`` defaults to ``safety * t_min``.
        """
        analytics._check_stable(params.chi1, params.chi2)
        w, J = params.omega_m, params.j12
        base = params.profile()
        steps = {
            1: DriveStep(w - J, base, 1),
            2: DriveStep(w + J, base.shifted(math.pi), 2),
        }
        if first_mode not in steps:
            raise ValueError("first_mode must be 1 or 2")
        if t_switch is None:
            G = analytics.transfer_rate(params.chi1, params.chi2)
            t_switch = safety * analytics.t_min(params.kappa, G)
        second = None if single_step else steps[3 - first_mode]
        return cls(steps[first_mode], second, float(t_switch))


def _validity_warnings(params: SystemParams) -> list[str]:
    chi = max(params.chi1, params.chi2)
    scales = {"omega_m": params.omega_m, "|j12|": abs(params.j12),
              "|j12 - omega_m|": abs(abs(params.j12) - params.omega_m)}
    return [f"chi = {chi:g} is not << {name} = {val:g}; off-resonant terms may matter"
            for name, val in scales.items() if chi > 0.1 * val]


def _normal_mode_diagnostics(state: GaussianState, t: float, omega_m: float) -> dict:
    nm = apply_symplectic(normal_mode_map(), state)
    out = {}
    for label, idx in (("b1", 1), ("b2", 3)):
        b = to_rotating_frame(reduced(nm, [idx]), t, omega_m)
        out[f"{label}_r"] = squeeze_parameter(b)
        out[f"{label}_occupation"] = mode_occupation(b, 0)
        out[f"{label}_purity"] = purity(b)
        out[f"{label}_cov"] = b.cov.copy()
    return out


def run_setup2(params: SystemParams, schedule=None,
               t_end: float | None = None, grid=201) -> ProtocolResult:
    """Coupled-cavity setup with the full four-mode lab-frame model.

    Without a second step the run is the single-step protocol and defaults to
    running until the addressed normal mode has settled. ``schedule`` may also
    be a callable taking ``params``, which lets sweeps rebuild it per row.
    """
    analytics._check_stable(params.chi1, params.chi2)
    if schedule is None:
        schedule = TwoStepSchedule.standard(params)
    elif callable(schedule):
        schedule = schedule(params)
    warnings = _validity_warnings(params)
    steps = [schedule.step1] + ([schedule.step2] if schedule.step2 is not None else [])
    models = [build_two_cavity_model(replace(params, delta=s.delta), s.profile).full for s in steps]
    if t_end is None:
        if schedule.step2 is not None:
            t_end = 2 * schedule.t_switch
        else:
            rwa = build_rwa_model(schedule.step1.profile, params.kappa, params.gamma_m, params.n_th)
            t_end = _settle_time([rwa])
    times = _grid(t_end, grid)
    t_switch = schedule.t_switch if schedule.step2 is not None else math.inf

    state = direct_sum(vacuum(2), thermal([params.n_th, params.n_th]))
    lab_states: list[GaussianState] = []
    lab_times: list[float] = []
    segments = [(0.0, min(t_switch, float(times[-1])), models[0])]
    if schedule.step2 is not None and times[-1] > t_switch:
        segments.append((t_switch, float(times[-1]), models[1]))
    switch_state = None
    for i, (t0, t1, model) in enumerate(segments):
        lo = (times > t0) if i else (times >= t0)
        requested = times[lo & (times <= t1)]
        traj = evolve(model, state, (t0, t1), np.union1d(requested, [t0, t1]))
        for k, t in enumerate(traj.times):
            if t in requested:
                lab_times.append(float(t))
                lab_states.append(traj[k])
        state = traj.final
        if t1 == t_switch:
            switch_state = state

    states = [to_rotating_frame(reduced(s, [2, 3]), t, params.omega_m)
              for s, t in zip(lab_states, lab_times)]
    eprs, occ, cross, pur = _metrics(states)
    diagnostics = {"final": _normal_mode_diagnostics(lab_states[-1], lab_times[-1], params.omega_m)}
    if switch_state is not None:
        diagnostics["after_step1"] = _normal_mode_diagnostics(switch_state, t_switch, params.omega_m)
        c_switch = to_rotating_frame(reduced(switch_state, [2, 3]), t_switch, params.omega_m)
        diagnostics["epr_min_after_step1"] = epr_min(c_switch)[0]
    regime = "single-step" if schedule.step2 is None else (
        "two-step" if params.gamma_m * params.n_th < 0.1 * params.kappa else "two-step (thermal)")
    return ProtocolResult(
        setup="setup2", times=np.array(lab_times), epr_min_series=eprs, occupations=occ,
        cross_moment=cross, purity_series=pur, final_state=states[-1],
        prediction=_prediction(params, params.phi, with_setup2=True),
        schedule=[(0.0, schedule.step1)] + ([(t_switch, schedule.step2)] if schedule.step2 else []),
        diagnostics=diagnostics, warnings=warnings, regime=regime,
    )


PROTOCOLS = {
    "setup1_rwa": run_setup1,
    "setup1_full": run_setup1_full,
    "setup2": run_setup2,
}

SWEEP_AXES = tuple(f.name for f in fields(SystemParams) if f.name != "pump")


@dataclass
class SweepRow:
    index: int
    value: float
    status: str
    summary: dict = field(default_factory=dict)
    message: str = ""


def _run_row(index, params, axis, value, protocol, run_kwargs) -> SweepRow:
    try:
        p = replace(params, **{axis: value})
        result = PROTOCOLS[protocol](p, **run_kwargs)
    except StabilityError as exc:
        return SweepRow(index, value, "unstable", message=str(exc))
    except (OptoSqueezeError, ValueError) as exc:
        return SweepRow(index, value, "error", message=str(exc))
    return SweepRow(index, value, "ok", result.summary())


def sweep(params: SystemParams, axis: str, values, protocol: str = "setup1_rwa",
          workers: int = 1, **run_kwargs) -> list[SweepRow]:
    """Run ``protocol`` once per value of the SystemParams field ``axis``.

    Rows are independent and deterministic; failures are recorded per row.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    values = list(values)
    jobs = [(i, params, axis, v, protocol, run_kwargs) for i, v in enumerate(values)]
    if workers <= 1 or len(jobs) <= 1:
        rows = [_run_row(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda job: _run_row(*job), jobs))
    return sorted(rows, key=lambda r: r.index)
