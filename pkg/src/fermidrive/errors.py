"""Exception hierarchy.

All errors derive from :class:`FermiDriveError`. ``ConfigError`` subclasses map
to CLI exit code 1, ``NumericError`` subclasses to exit code 2.
"""


class FermiDriveError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FermiDriveError, ValueError):
    """Invalid user input: sizes, sites, parameters, file contents."""


class NumericError(FermiDriveError, ArithmeticError):
    """A computation could not be carried out or did not meet its contract."""


class NonHermitianInput(ConfigError):
    pass


class InvalidSize(ConfigError):
    pass


class SiteOutOfRange(ConfigError, IndexError):
    pass


class DimensionMismatch(ConfigError):
    pass


class InvalidProtocol(ConfigError):
    pass


class AmbiguousFilling(ConfigError):
    """The half-filled ground state is ill defined because of a zero-energy mode."""


class SizeLimit(ConfigError):
    pass


class SingularDenominator(NumericError, ZeroDivisionError):
    pass


class VanishingMu(NumericError):
    """Some energy mode has zero weight on both operated sites."""


class VanishingDenominator(NumericError, ZeroDivisionError):
    pass


class DegenerateSpectrum(NumericError):
    pass


class NoSolution(NumericError):
    pass


class NotConverged(NumericError):
    def __init__(self, max_iter, last_delta):
        self.max_iter = max_iter
        self.last_delta = last_delta
        super().__init__(
            f"fixed-point iteration did not converge in {max_iter} iterations "
            f"(last step difference {last_delta:.3e})"
        )


class SingularLiouvillian(NumericError):
    pass


class TraceDrift(NumericError):
    pass


class StabilityWarning(UserWarning):
    """Integrator step size exceeds the stability guard."""
