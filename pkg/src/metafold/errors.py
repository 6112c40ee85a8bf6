"""Exception hierarchy shared by every metafold module."""


class MetagraphError(Exception):
    """Base class for domain errors raised by metafold."""


class UnknownNameError(MetagraphError, KeyError):
    """A type name, edge id or DTMG name that is not registered."""

    def __str__(self):
        return Exception.__str__(self)


class SlotRangeError(MetagraphError, IndexError):
    pass


class TypeMismatchError(MetagraphError, TypeError):
    pass


class PartitionError(MetagraphError, ValueError):
    def __init__(self, message, missing=(), duplicated=(), extra=()):
        super().__init__(message)
        self.missing = tuple(missing)
        self.duplicated = tuple(duplicated)
        self.extra = tuple(extra)


class RegistryError(MetagraphError, ValueError):
    pass


class CapacityError(MetagraphError, ValueError):
    pass


class SizeError(MetagraphError, ValueError):
    pass


class RouteError(MetagraphError):
    pass


class DecomposeError(MetagraphError):
    pass


class DivergenceError(MetagraphError):
    def __init__(self, message, seed=None):
        super().__init__(message)
        self.seed = seed


class ArityError(MetagraphError):
    pass


class WeightError(MetagraphError, ValueError):
    pass


class HostError(MetagraphError, ValueError):
    pass


class MappingError(MetagraphError, ValueError):
    pass


class SmoothnessError(MetagraphError, ValueError):
    pass


class ContinuityError(MetagraphError):
    pass


class ApplicabilityError(MetagraphError):
    pass


class MembershipError(MetagraphError, ValueError):
    pass


class StateError(MetagraphError):
    pass


class TraceError(MetagraphError, ValueError):
    def __init__(self, message, trace_index=None):
        super().__init__(message)
        self.trace_index = trace_index


class MgfError(MetagraphError, ValueError):
    """Parse failure in an MGF document; ``line`` is 1-based."""

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.reason = message


class FoldError(MetagraphError):
    """A handler failed; ``path`` locates the sub-expression (L/R steps)."""

    def __init__(self, message, path=""):
        super().__init__(f"{message} (at {path or 'root'})")
        self.path = path


class CrfError(MetagraphError, ValueError):
    """A routing function that is not an invertible partial pairing."""
