"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A model parameter or configuration value is out of its valid range."""


class ConstructionError(RuntimeError):
    """The street system cannot be built from the given input points."""


class VisibilityError(ValueError):
    """A propagation query was made for a pair that shares no street."""


class FitError(RuntimeError):
    """Base class for logistic-fit failures."""


class NoTransitionError(FitError):
    """The curve segment carries no usable 0-to-1 (or 1-to-0) transition."""


class DirectionError(FitError):
    """The fitted slope sign contradicts the requested transition direction."""


class BruteForceLimitError(RuntimeError):
    """Too many users on a street for exhaustive subset enumeration."""
