"""Exception hierarchy shared by every module."""


class RKHSGeometryError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(RKHSGeometryError, ValueError):
    """A point lies outside the domain of the kernel or metric."""


class ValidationError(RKHSGeometryError, ValueError):
    """Invalid construction parameters (negative exponent, bad moments, ...)."""


class UndefinedError(RKHSGeometryError):
    """A pairing or distance is undefined because a kernel function vanishes."""


class BranchError(RKHSGeometryError):
    """A non-integer power of a kernel would cross the branch cut of log."""


class TruncationError(RKHSGeometryError):
    """A truncated series kernel cannot meet its tail tolerance."""


class ConditioningError(RKHSGeometryError):
    """A Gram matrix is singular even after diagonal jitter."""


class InconsistencyError(RKHSGeometryError):
    """Two independent computations of the same quantity disagree."""


class UnsupportedError(RKHSGeometryError):
    """The requested operation is not supported for this kernel family."""


class DegenerateError(RKHSGeometryError):
    """Degenerate input (coincident points, zero distance, base point in S)."""


class ResolutionError(RKHSGeometryError):
    """A search grid is too coarse to connect the requested points."""


class SpecParseError(RKHSGeometryError, ValueError):
    """A kernel or subspace spec string failed to parse."""

    def __init__(self, message, text="", position=None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} at position {position}: {text!r}"
        super().__init__(message)
