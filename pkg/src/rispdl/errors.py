"""Exception types raised by rispdl."""


class RisPdlError(Exception):
    """Base class for all rispdl errors."""


class DomainError(RisPdlError, ValueError):
    """An argument lies outside the domain of the requested function."""


class ConvergenceError(RisPdlError, ArithmeticError):
    """A series or continuation did not reach its tolerance.

    ``residual`` holds the last error estimate.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual estimate {residual:.3e})")
        self.residual = residual


class QuadratureError(RisPdlError, ArithmeticError):
    """Adaptive quadrature hit its subdivision cap before meeting tolerance."""


class ConfigError(RisPdlError, ValueError):
    """Invalid scenario or sweep configuration."""
