"""Exception types shared across the package."""


class WavegateError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(WavegateError, ValueError):
    """A configuration value violates its documented constraints."""


class PoleError(ConfigurationError):
    """A carrier frequency lands exactly on a tangent pole of the speed formula."""


class ContractError(WavegateError, ValueError):
    """A caller violated an operation precondition (shapes, ordering, ...)."""


class FrameValidationError(WavegateError, ValueError):
    """A probability frame carries values outside the admissible range."""


class FrameFormatError(WavegateError, ValueError):
    """A serialized frame record could not be parsed."""


class NumericalInstabilityError(WavegateError, ArithmeticError):
    """A lattice field stopped being finite during stepping."""


class InsufficientDataError(WavegateError, ValueError):
    """Not enough samples to run the requested analysis."""


class ResolutionError(WavegateError, ValueError):
    """A sampled profile is too coarse for the requested harmonic."""


class DomainError(WavegateError, ValueError):
    """Arguments lie outside the mathematical domain of a closed form."""
