"""Exception types raised across the package."""


class DiffuseError(Exception):
    """Base class for all package errors."""


class DegreeSequenceError(DiffuseError, ValueError):
    """A degree specification cannot be realized (e.g. odd total degree)."""


class SamplingError(DiffuseError):
    """Rejection sampling ran out of attempts.

    Attributes
    ----------
    nonsimple, disconnected : int
        How many candidate pairings were rejected for each reason.
    """

    def __init__(self, message, nonsimple=0, disconnected=0):
        super().__init__(message)
        self.nonsimple = nonsimple
        self.disconnected = disconnected


class UnreachableNodesError(DiffuseError):
    """SI run asked to infect every node of a disconnected graph."""

    def __init__(self, message, component_sizes=()):
        super().__init__(message)
        self.component_sizes = tuple(component_sizes)


class ComponentDeathError(DiffuseError):
    """The exploration ran out of active clones before the stop condition."""

    def __init__(self, message, iteration, adoptions):
        super().__init__(message)
        self.iteration = iteration
        self.adoptions = adoptions


class InsufficientAdoptionsError(DiffuseError, ValueError):
    """A trace does not reach the adoption count a query needs."""


class ODEStepError(DiffuseError):
    """Fixed-step integration failed its half-step consistency check."""


class EnsembleError(DiffuseError):
    """Too many replicas of an ensemble failed."""

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)
