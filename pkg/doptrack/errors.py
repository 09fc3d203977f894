class DoptrackError(Exception):
    """Base class for every error raised by doptrack."""


class ConfigError(DoptrackError):
    pass


class DegenerateGeometryError(DoptrackError, ValueError):
    """A target position coincides with a station, so a unit vector is undefined."""


class LengthMismatchError(DoptrackError, ValueError):
    pass


class WindowRangeError(DoptrackError, IndexError):
    pass


class SingularSystemError(DoptrackError, ArithmeticError):
    pass


class InsufficientDetectionsError(DoptrackError, ValueError):
    pass


class SolverFailedError(DoptrackError, RuntimeError):
    pass


class StageError(DoptrackError):
    """A pipeline stage failed; ``stage`` names it for diagnostics."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
