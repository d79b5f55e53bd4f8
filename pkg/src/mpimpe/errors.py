"""Exception hierarchy shared by all modules."""


class MpiMpeError(Exception):
    """Base class for every error raised by this package."""


class InputError(MpiMpeError, ValueError):
    """Invalid user input. ``row`` is the 0-based data row index when known."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class MalformedRow(InputError):
    pass


class NonUniformSpacing(InputError):
    pass


class NegativeValue(InputError):
    pass


class IncompatibleResolution(InputError):
    pass


class ZeroPeak(InputError):
    pass


class ZeroYield(InputError):
    pass


class MisalignedSeries(InputError):
    pass


class InvalidFraction(InputError):
    pass


class InvalidSpec(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class EmptyCurve(InputError):
    pass


class MissingReferencePoint(InputError):
    pass


class InfeasibleSpec(MpiMpeError):
    """A dispatch LP turned out infeasible. Cannot happen for valid inputs."""


class WindowSolveError(MpiMpeError):
    """The LP of one rolling-horizon window did not reach optimality."""

    def __init__(self, window: int, status: str, start_index: int | None = None):
        self.window = window
        self.status = status
        self.start_index = start_index
        where = f" (starting at step {start_index})" if start_index is not None else ""
        super().__init__(f"window {window}{where}: LP status {status}")
