"""Exception types raised across the package."""


class PairlindError(Exception):
    """Base class for all package errors."""


class InvalidArgument(PairlindError, ValueError):
    pass


class DegenerateInput(PairlindError, ValueError):
    pass


class NoConvergence(PairlindError, RuntimeError):
    def __init__(self, message, last=None, residual=None):
        super().__init__(message)
        self.last = last
        self.residual = residual


class OutsideCoolingRegime(PairlindError, ValueError):
    """eta <= 1 met while solving the resonance condition."""

    def __init__(self, message, eta=None, omega_r=None):
        super().__init__(message)
        self.eta = eta
        self.omega_r = omega_r


class LasingInstability(PairlindError, ValueError):
    """Closed-form steady state requested for eta <= 1."""


class NotNormalizable(PairlindError, ValueError):
    pass


class NonUniqueSteadyState(PairlindError, RuntimeError):
    def __init__(self, message, null_dim=None):
        super().__init__(message)
        self.null_dim = null_dim


class StiffnessError(PairlindError, RuntimeError):
    def __init__(self, message, fastest_rate=None):
        super().__init__(message)
        self.fastest_rate = fastest_rate


class TruncationError(PairlindError, RuntimeError):
    """Cutoff cap reached before the tail population fell below tolerance."""
