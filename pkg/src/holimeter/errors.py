"""Exception hierarchy shared across the package."""

from __future__ import annotations


class HolimeterError(Exception):
    """Base class for every error raised by holimeter."""


# -- time series ------------------------------------------------------------

class LengthNotDivisible(HolimeterError, ValueError):
    pass


class NoOverlap(HolimeterError, ValueError):
    pass


class GridMismatch(HolimeterError, ValueError):
    """Two series do not share a slot length or slot grid."""


class LengthMismatch(HolimeterError, ValueError):
    pass


# -- household / data -------------------------------------------------------

class DataError(HolimeterError):
    """Problems with input data files (CLI exit code 2)."""


class SchemaError(DataError, ValueError):
    pass


class GapError(DataError, ValueError):
    pass


class UnitError(DataError, ValueError):
    pass


class SpecError(HolimeterError, ValueError):
    """Infeasible or inconsistent household / generator specification."""


class WindowViolation(HolimeterError, ValueError):
    pass


class StorageError(HolimeterError, ValueError):
    """Invalid storage unit (e.g. a gas tank)."""


class NegativeResidualWarning(UserWarning):
    """Whole-house minus appliance columns went negative and was clamped.

    ``slots`` holds the clamped slot indices and ``resource`` the stream.
    """

    def __init__(self, message: str, resource=None, slots=()):
        super().__init__(message)
        self.resource = resource
        self.slots = tuple(slots)


# -- shaping ----------------------------------------------------------------

class SolverError(HolimeterError):
    """Raised when the LP engine cannot return an optimal point."""


class Infeasible(SolverError):
    pass


class Unbounded(SolverError):
    pass


class IterationLimit(SolverError):
    pass


class MissingStorage(HolimeterError, ValueError):
    pass


# -- privacy ----------------------------------------------------------------

class KeyMismatch(HolimeterError, ValueError):
    pass


class ConfigError(HolimeterError, ValueError):
    """Invalid run configuration (CLI exit code 1)."""
