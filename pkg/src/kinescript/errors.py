"""Exception types shared across the pipeline."""


class KinescriptError(Exception):
    """Base class for all pipeline errors."""


class InvalidCommand(KinescriptError):
    """A meta command violates a semantic invariant."""


class InvalidSample(KinescriptError):
    """A telemetry sample violates a semantic invariant."""


class MalformedFrame(KinescriptError):
    """A wire frame cannot be parsed (syntax error, truncation, bad types)."""


class UnknownMode(KinescriptError):
    """Mode index or name not present in the registry."""


class RegistryLoadError(KinescriptError):
    """Registry file failed validation; message names the offending entry."""


class InvalidRecipe(KinescriptError):
    """Recipe validation failure, with segment index and field."""

    def __init__(self, message: str, segment: int | None = None, field: str | None = None):
        self.segment = segment
        self.field = field
        if segment is not None:
            message = f"segment {segment}: {message}"
        super().__init__(message)


class IgnoredDuringRecipe(KinescriptError):
    """UI event arrived while a recipe is running; event was not applied."""


class BackendUnavailable(KinescriptError):
    """The planner backend cannot be reached."""


class NoTempoBank(KinescriptError):
    """Tempo adverb requested for a mode without speed support."""


class EmptyTrajectory(KinescriptError):
    """Annotation requested for a trajectory with no segments."""


class WindowTooShort(KinescriptError):
    """Not enough samples around a mode switch to judge transition quality."""


class AlignmentError(KinescriptError):
    """Package invariants failed before write or after load."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class ParseError(KinescriptError):
    """A package file could not be parsed."""


class IoError(KinescriptError):
    """Filesystem failure while writing or reading a package."""


class PortInUse(KinescriptError):
    """Requested service port is already bound."""
