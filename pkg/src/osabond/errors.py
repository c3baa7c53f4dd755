"""Exception types shared by all engines."""


class OsabondError(Exception):
    """Base class for all package errors."""


class ConfigError(OsabondError, ValueError):
    """A scenario parameter is missing, malformed, or inconsistent."""


class CapacityError(OsabondError):
    """A state space or enumeration exceeds its configured bound."""


class ConvergenceError(OsabondError):
    """Iterative steady-state solve ran out of its iteration budget."""


class SingularError(OsabondError):
    """Direct steady-state solve found no unique stationary vector."""


class ConstraintError(OsabondError, ValueError):
    """An optimization constraint is violated by the supplied scenario."""


class UndefinedMetricError(OsabondError, ZeroDivisionError):
    """A metric is requested on data for which it has no value."""
