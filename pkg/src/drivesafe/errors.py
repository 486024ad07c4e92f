"""Exception hierarchy shared across the drivesafe package."""


class DriveSafeError(Exception):
    """Base class for all package-specific errors."""


class DomainError(DriveSafeError):
    """A value lies outside its documented domain (bad id, range, label)."""


class DegenerateInputError(DriveSafeError):
    """Input is structurally valid but too short/empty for the operation."""


class ConsistencyError(DriveSafeError):
    """Inputs that must agree (e.g. period indices) do not."""


class ScenarioError(DriveSafeError):
    """A scenario script or manifest is unusable before the run starts."""


class DecodeError(DriveSafeError):
    """A wire frame could not be decoded.

    ``field`` names the offending field when one can be identified.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class EndOfReplay(DriveSafeError):
    """A replay trace has no entry for the requested period."""
