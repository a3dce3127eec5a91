"""Exception types raised across the package."""


class CoopnetError(Exception):
    """Base class for package errors."""


class InvalidConfigError(CoopnetError, ValueError):
    pass


class InvalidArgumentError(CoopnetError, ValueError):
    pass


class GraphError(CoopnetError, ValueError):
    """Rejected graph mutation (self-edge, duplicate edge, unknown node)."""


class InsufficientTargetsError(CoopnetError, ValueError):
    pass


class PoolExhaustedError(CoopnetError, ValueError):
    pass


class UndefinedMetricError(CoopnetError, ValueError):
    pass


class ExportError(CoopnetError, OSError):
    pass
