"""Exception types raised by framework operations."""


class FrameworkError(ValueError):
    """Base class for every refused or failed framework operation."""


class DimensionError(FrameworkError):
    """Points of mismatched or unsupported dimension."""


class DegenerateConfigurationError(FrameworkError):
    """A point set that must be affinely independent / in general position is not."""


class NoUniquePhiError(DegenerateConfigurationError):
    """The homogeneous point matrix has no one-dimensional null space."""


class AmbiguousRegionError(FrameworkError):
    """A query point lies on an (extended) side of the reference triangle."""


class InadmissibleRegionError(FrameworkError):
    """A relay point lies in a region that would give a nonpositive scaling."""

    def __init__(self, message, region=None, admissible=()):
        super().__init__(message)
        self.region = region
        self.admissible = frozenset(admissible)


class PerceptionError(FrameworkError):
    """Not enough vertices within the perception radius."""


class TopologyError(FrameworkError):
    """The requested edit does not apply to this graph (missing edge, leader, ...)."""


class AuditError(FrameworkError):
    """An edit produced a framework that fails the spectral audit.

    The input framework is left untouched; ``report`` holds the failing audit.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class StaleHierarchyError(TopologyError):
    """A vertex's stress row is no longer the sum of its recorded addition blocks.

    Raised by inner-vertex deletion when a later edit changed the row, so the
    recorded blocks cannot be peeled off cleanly.
    """
