"""bonnetlab exceptions."""

from typing import Optional


class BonnetLabError(Exception):
    """Base class of every error raised by bonnetlab."""

    exit_code = 3

    def __init__(self, message: str, check: Optional[str] = None) -> None:
        """Initialize a new BonnetLabError object.

        Args:
            message: Human readable description of the failure.
            check: Name of the check or stage that failed, if any.
        """
        self.message = message
        self.check = check
        super().__init__(self.message)


class ConfigError(BonnetLabError):
    """Raised when a run configuration cannot be parsed or is invalid."""

    exit_code = 2

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None
    ) -> None:
        """Initialize a new ConfigError object.

        Args:
            message: Description of the problem.
            path: Configuration file that triggered the error.
            line: 1-based line of the offending token, when known.
            column: 1-based column of the offending token, when known.
        """
        self.path = path
        self.line = line
        self.column = column
        location = ':'.join(str(x) for x in (path, line, column) if x is not None)
        super().__init__(f'{location}: {message}' if location else message)


class NumericalError(BonnetLabError):
    """Base class of failures raised by the numerical pipeline."""


class OutOfDomain(NumericalError):
    """Raised when a chart is evaluated outside its domain."""


class DegenerateImmersion(NumericalError):
    """Raised when f_u and f_v are (numerically) linearly dependent."""


class MaskViolation(NumericalError):
    """Raised when a frame rule is undefined at a required sample point."""


class NonIsothermalChart(NumericalError):
    """Raised when an isothermal-only quantity is requested on a general chart."""


class UndefinedDirections(NumericalError):
    """Raised when curvature-line directions are requested where they do not exist."""


class EmptyMask(NumericalError):
    """Raised when the pseudo-umbilic set of a sign covers the whole grid."""


class LoopThroughSingularity(NumericalError):
    """Raised when an index loop passes through a pseudo-umbilic point."""


class NotCompactChart(NumericalError):
    """Raised when a global integral is requested on a chart of an open patch."""


class NotInvolutive(NumericalError):
    """Raised when A± does not vanish, so the θ± system has no solutions."""


class RangeEscape(NumericalError):
    """Raised when a solved θ± leaves [0, 2π]."""


class CompatibilityViolation(NumericalError):
    """Raised when mate data violate the Gauss or Ricci equation."""


class FrameBlowup(NumericalError):
    """Raised when an integrated frame stops being orthonormal."""


class NotIsothermic(NumericalError):
    """Raised when Ω∓ is not co-closed, so no deformation exists."""


class NonSimplyConnectedPath(NumericalError):
    """Raised when the log L integral depends on the path."""


class ClosureFailure(NumericalError):
    """Raised when a bending-field integral depends on the path."""


class UnknownEntry(NumericalError, KeyError):
    """Raised when a zoo entry does not exist."""

    def __str__(self) -> str:
        return self.message
