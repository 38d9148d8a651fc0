"""Exception types shared across the package."""


class LabError(Exception):
    """Base class for every domain-specific failure raised by this package."""


class DomainError(LabError, ValueError):
    """An argument or state lies outside an operation's mathematical domain."""


class ConfigError(DomainError):
    """A scenario or run configuration is invalid."""


class OverflowGuardError(LabError, OverflowError):
    """Integer input outside the window for which exactness is guaranteed."""


class AmplitudeUnderflowError(DomainError):
    """A requested cluster amplitude cannot be represented in double precision."""


class OscillationBandError(DomainError):
    """K0 lies outside the open oscillation band, or at the center equilibrium."""


class PeriodDivergenceError(LabError):
    """No half-period crossing was found within the search horizon."""


class PeriodUnreachableError(DomainError):
    """The requested period is at or below the small-oscillation limit."""


class BranchScanError(LabError):
    """Period inversion failed to bracket a unique root on the sampled branch."""


class HeteroclinicError(LabError):
    """The integrator stalled, typically near the separatrix level set."""


class ActionSingularityError(LabError):
    """An action reached zero, where the square-root coupling is singular."""


class ShortSeriesError(LabError):
    """The time series is too short for the requested estimate."""


class BlowUpError(LabError):
    """Non-finite values appeared during time stepping.

    Carries the last finite state (``last_good``) and the time at which it
    was recorded, so a caller can inspect how far the run got.
    """

    def __init__(self, message, t=None, last_good=None):
        super().__init__(message)
        self.t = t
        self.last_good = last_good


class ReportWriteError(LabError, OSError):
    """Writing a report artifact failed; the message names the path."""
