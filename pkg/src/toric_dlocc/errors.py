"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes (see ``toric_dlocc.cli``).
"""


class ToricError(Exception):
    """Base class for all library errors."""


class InvalidSizeError(ToricError, ValueError):
    pass


class InvalidBipartitionError(ToricError, ValueError):
    pass


class DomainError(ToricError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class CapacityError(ToricError):
    """Requested enumeration or Hilbert space is too large for exact methods."""


class SectorAmbiguityError(ToricError):
    """Degenerate ground-state candidates could not be told apart by loop operators."""


class GridError(ToricError, ValueError):
    pass


class MultiCrossingError(ToricError):
    """A derivative sign column changes sign more than once over alpha."""


class ConfigError(ToricError, ValueError):
    pass


class ValidationFailure(ToricError):
    pass
