"""Exception hierarchy.

Two broad families matter to callers (and to the CLI exit codes):
``ConfigError`` for anything wrong with user-supplied parameters, and
``NumericalError`` for failures of the numerics themselves.
"""


class PdKernelError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PdKernelError, ValueError):
    """Invalid configuration, parameters, or input files."""


class DegenerateKernelError(ConfigError):
    """Truncation tolerance so large that no interaction terms survive."""


class NumericalError(PdKernelError, RuntimeError):
    """A numerical procedure failed (singular system, NaN, non-convergence)."""


class SingularSystemError(NumericalError):
    """Continuity system is rank deficient at a wavenumber.

    Carries the offending wavenumber in ``xi``.
    """

    def __init__(self, message, xi=None):
        super().__init__(message)
        self.xi = xi


class QuadratureError(NumericalError):
    """Fourier-coefficient quadrature did not converge at the requested grid."""


class DerivationError(NumericalError):
    """Derived quantities violate a structural identity (e.g. residual
    imaginary parts above tolerance)."""
