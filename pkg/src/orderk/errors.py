"""Exception hierarchy shared by all orderk modules."""


class OrderKError(Exception):
    """Base class for every error raised by orderk."""


class GeometryError(OrderKError):
    pass


class InsufficientPoints(GeometryError):
    pass


class PeriodicCutoffExceeded(GeometryError):
    """A sphere radius reached L/4, where minimum-image distances stop being safe."""


class DegenerateTuple(GeometryError):
    """The points of a tuple are (numerically) affinely dependent."""

    def __init__(self, msg, labels=None):
        super().__init__(msg if labels is None else f"{msg} (tuple {tuple(labels)})")
        self.labels = None if labels is None else tuple(labels)


class AmbiguousSide(GeometryError):
    """A sphere center lies on a facet hull; the input is not in general position."""

    def __init__(self, msg, labels=None):
        super().__init__(msg if labels is None else f"{msg} (tuple {tuple(labels)})")
        self.labels = None if labels is None else tuple(labels)


class UnsupportedDimension(OrderKError):
    pass


class DuplicateCellOwnership(OrderKError):
    pass


class InvalidType(OrderKError, ValueError):
    pass


class DomainError(OrderKError, ValueError):
    pass


class MissingConstant(OrderKError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class TooLarge(OrderKError):
    pass


class BoundaryContamination(OrderKError):
    pass


class BiasFlag(OrderKError):
    """The r_max audit failed: some interval may lie beyond the enumeration cutoff."""
