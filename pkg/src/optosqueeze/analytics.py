"""Closed-form predictions for dissipative two-mode mechanical squeezing.

Everything here is elementary-function evaluation; these functions are the
oracles the simulated dynamics are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import StabilityError


def _check_stable(chi1: float, chi2: float) -> None:
    if chi1 < 0 or chi2 < 0:
        raise ValueError("coupling amplitudes must be nonnegative")
    if chi1 >= chi2:
        raise StabilityError(
            f"stability violated: chi1 = {chi1:g} >= chi2 = {chi2:g}; "
            "cooling must dominate parametric anti-damping"
        )


def squeeze_param(chi1: float, chi2: float) -> float:
    """r = atanh(chi1 / chi2)."""
    _check_stable(chi1, chi2)
    return math.atanh(chi1 / chi2)


def transfer_rate(chi1: float, chi2: float) -> float:
    """Beam-splitter rate G = chi2 sqrt(1 - (chi1/chi2)^2) in the squeezed frame."""
    _check_stable(chi1, chi2)
    return chi2 * math.sqrt(1.0 - (chi1 / chi2) ** 2)


def d0(kappa: float, gamma_m: float, G: float) -> float:
    """Mixedness parameter; 0 for a pure fixed point, 1 without cavity cooling."""
    if kappa < 0 or gamma_m < 0:
        raise ValueError("rates must be nonnegative")
    if kappa == 0 and gamma_m == 0:
        raise ValueError("d0 is undefined when both kappa and gamma_m vanish")
    return 1.0 - 4.0 * kappa * G**2 / ((kappa + gamma_m) * (kappa * gamma_m + 4.0 * G**2))


def d0_approx(kappa: float, gamma_m: float, G: float) -> float:
    """Leading behaviour of d0 for kappa >> gamma_m."""
    return gamma_m / kappa + kappa * gamma_m / (4.0 * G**2)


def _d1_d2(r: float, n_th: float) -> tuple[float, float]:
    d1 = n_th * math.cosh(2 * r) + math.sinh(r) ** 2
    d2 = (n_th + 0.5) * math.sinh(2 * r)
    return d1, d2


def steady_moments(r: float, phi: float, d0: float, n_th: float) -> tuple[float, complex]:
    """Steady <c_j^dag c_j> and <c1 c2> of the two mechanical oscillators."""
    d1, d2 = _d1_d2(r, n_th)
    c2r, s2r = math.cosh(2 * r), math.sinh(2 * r)
    occupation = d0 * d1 * c2r - d0 * d2 * s2r + math.sinh(r) ** 2
    cross = (-(d0 * d1 + 0.5) * s2r + d0 * d2 * c2r) * complex(math.cos(phi), math.sin(phi))
    return occupation, cross


def epr_min_setup1(r: float, d0: float, n_th: float) -> float:
    return 2.0 * math.exp(-2 * r) * (1.0 - d0) + 2.0 * (2.0 * n_th + 1.0) * d0


def nth_max_setup1(r: float, d0: float) -> float:
    """Thermal occupation at which the EPR variance reaches 2.

    Returns ``math.inf`` when d0 = 0 (squeezing survives any temperature).
    """
    if not 0 <= d0 <= 1:
        raise ValueError(f"d0 must lie in [0, 1], got {d0}")
    if d0 == 0:
        return math.inf
    return (1.0 - d0) / (2.0 * d0) * (1.0 - math.exp(-2 * r))


def nth_max_setup1_approx(kappa: float, gamma_m: float, chi1: float, chi2: float) -> float:
    return 4.0 * kappa * chi1 * (chi2 - chi1) / (gamma_m * (kappa**2 + 4.0 * (chi2**2 - chi1**2)))


def eigenvalues(kappa: float, G: float) -> tuple[complex, complex]:
    """eta_pm = -kappa/2 +/- sqrt(kappa^2/4 - G^2)."""
    root = np.sqrt(complex(kappa**2 / 4 - G**2))
    return complex(-kappa / 2 + root), complex(-kappa / 2 - root)


def t_min_info(kappa: float, G: float) -> tuple[float, bool]:
    """Preparation time and whether it was extrapolated.

    For G >= kappa/2 this is 4/kappa. Below that the slower eigenvalue
    eta_+ sets the time, 2/|Re eta_+|, which reduces to 4/kappa at the
    boundary; that branch is flagged as extrapolated.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if G <= 0:
        raise ValueError("G = 0: no state transfer, the squeezed state is never prepared")
    if G >= kappa / 2:
        return 4.0 / kappa, False
    eta_plus = -kappa / 2 + math.sqrt(kappa**2 / 4 - G**2)
    return 2.0 / abs(eta_plus), True


def t_min(kappa: float, G: float) -> float:
    return t_min_info(kappa, G)[0]


@dataclass(frozen=True)
class Setup2Thermal:
    r_tilde: float
    n_bar2: float
    xi2: complex
    epr_min_inf: float
    nth_max: float


def setup2_thermal(r: float, phi: float, d0: float, n_th: float) -> Setup2Thermal:
    """Single-step coupled-cavity predictions with thermal mechanical baths."""
    d1, d2 = _d1_d2(r, n_th)
    r_tilde = 0.25 * math.log((2 * d0 * (d1 + d2) + 1) / (2 * d0 * (d1 - d2) + 1))
    n_bar2 = math.sqrt((d0 * d1 + 0.5) ** 2 - d0**2 * d2**2) - 0.5
    xi2 = (r - r_tilde) * complex(math.cos(phi), -math.sin(phi))
    epr_inf = math.exp(-2 * r) * (1 - d0) + (2 * n_th + 1) * (1 + d0)
    nth_max = (1 - d0) / (2 * (1 + d0)) * (1 - math.exp(-2 * r))
    return Setup2Thermal(r_tilde, n_bar2, xi2, epr_inf, nth_max)


@dataclass(frozen=True)
class AnalyticPrediction:
    r: float
    G: float
    d0: float
    occupation: float
    cross: complex
    epr_min: float
    nth_max: float
    t_min: float
    eigen: tuple[complex, complex]
    t_min_extrapolated: bool = False
    nth_max_approx: float | None = None
    d0_approx: float | None = None
    setup2: Setup2Thermal | None = field(default=None)

    def as_dict(self) -> dict:
        out = {
            "r": self.r,
            "G": self.G,
            "d0": self.d0,
            "d0_approx": self.d0_approx,
            "occupation": self.occupation,
            "cross_re": self.cross.real,
            "cross_im": self.cross.imag,
            "epr_min": self.epr_min,
            "nth_max": self.nth_max,
            "nth_max_approx": self.nth_max_approx,
            "t_min": self.t_min,
            "t_min_extrapolated": self.t_min_extrapolated,
            "eta_plus": [self.eigen[0].real, self.eigen[0].imag],
            "eta_minus": [self.eigen[1].real, self.eigen[1].imag],
        }
        if self.setup2 is not None:
            s = self.setup2
            out["setup2"] = {
                "r_tilde": s.r_tilde,
                "n_bar2": s.n_bar2,
                "xi2_re": s.xi2.real,
                "xi2_im": s.xi2.imag,
                "epr_min_inf": s.epr_min_inf,
                "nth_max": s.nth_max,
            }
        return out


def predict(kappa: float, gamma_m: float, n_th: float, chi1: float, chi2: float,
            phi: float = 0.0, with_setup2: bool = False) -> AnalyticPrediction:
    """All closed-form quantities for one parameter set."""
    r = squeeze_param(chi1, chi2)
    G = transfer_rate(chi1, chi2)
    dd = d0(kappa, gamma_m, G)
    occ, cross = steady_moments(r, phi, dd, n_th)
    tm, extrapolated = t_min_info(kappa, G) if kappa > 0 and G > 0 else (math.nan, True)
    approx = None
    d0a = None
    if gamma_m > 0 and kappa > 0:
        approx = nth_max_setup1_approx(kappa, gamma_m, chi1, chi2)
        d0a = d0_approx(kappa, gamma_m, G)
    return AnalyticPrediction(
        r=r, G=G, d0=dd, occupation=occ, cross=cross,
        epr_min=epr_min_setup1(r, dd, n_th), nth_max=nth_max_setup1(r, dd),
        t_min=tm, eigen=eigenvalues(kappa, G), t_min_extrapolated=extrapolated,
        nth_max_approx=approx, d0_approx=d0a,
        setup2=setup2_thermal(r, phi, dd, n_th) if with_setup2 else None,
    )
