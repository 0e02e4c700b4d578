"""Exception types raised across the toolkit."""


class OptoSqueezeError(Exception):
    """Base class for all toolkit errors."""


class InvalidState(OptoSqueezeError, ValueError):
    """A covariance matrix or density operator violates a physical constraint."""


class NotSymplecticError(OptoSqueezeError, ValueError):
    """A matrix offered as a symplectic map does not preserve the symplectic form."""

    def __init__(self, deviation: float):
        super().__init__(f"matrix is not symplectic: ||S W S^T - W|| = {deviation:.3e}")
        self.deviation = deviation


class StabilityError(OptoSqueezeError, ValueError):
    """The linearized dynamics has no stable steady state.

    Raised when the drift is not Hurwitz, or up front when the parametric
    coupling is not dominated by the beam-splitter coupling (chi1 >= chi2).
    """

    def __init__(self, message: str, eigenvalue: complex | None = None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class ConditionError(OptoSqueezeError, ValueError):
    """Drive parameters violate a resonance or phase condition of a protocol."""


class IntegrationError(OptoSqueezeError, RuntimeError):
    """The adaptive integrator failed (step-size underflow, divergence)."""

    def __init__(self, message: str, t_fail: float):
        super().__init__(f"{message} (at t = {t_fail:.6g})")
        self.t_fail = t_fail


class TruncationError(OptoSqueezeError, RuntimeError):
    """Population leaked into the highest retained Fock level."""


class NoSolutionError(OptoSqueezeError, ValueError):
    """A root search found no admissible solution."""


class ConfigError(OptoSqueezeError, ValueError):
    """A run configuration is malformed or incomplete."""
