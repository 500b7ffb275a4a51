"""Exception types shared across the package."""


class ErgolabError(ValueError):
    """Base class for domain errors."""


class NoSmoothStructure(ErgolabError):
    """Bundle/derivative data requested on a system without a smooth splitting."""


class UnsupportedDirection(ErgolabError):
    """Backward iteration requested on a non-invertible system."""


class VariantMismatch(ErgolabError):
    """Two points (or a point and a system) from different system variants."""


class InsufficientWindow(ErgolabError):
    """A symbolic/sequence operation would read outside the represented window."""


class InvalidModel(ErgolabError):
    """System construction violates a model invariant."""


class DegenerateFit(ErgolabError):
    """Slope fit impossible (e.g. all partition sums zero)."""
