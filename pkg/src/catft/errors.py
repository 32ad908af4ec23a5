"""Exception types shared across the package."""


class CatftError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(CatftError):
    """A Fock-space dimension is too small or inconsistent."""


class InvalidModeError(CatftError):
    """A mode index does not exist or two modes coincide."""


class TruncationError(CatftError):
    """A state or operator does not fit in the requested truncation.

    Carries ``required_dim`` as a hint for a truncation that would work.
    """

    def __init__(self, message, required_dim=None):
        super().__init__(message)
        self.required_dim = required_dim


class DegenerateCodeError(CatftError):
    """Codeword construction produced a numerically meaningless state."""


class InvalidStateError(CatftError):
    """A state is degenerate (for example zero norm) where it must not be."""


class DecodeDegenerateError(CatftError):
    """The recovery map could not be built from the accumulated channel."""


class ConfigError(CatftError):
    """A run configuration failed validation.

    ``path`` locates the offending field, for example ``"space.alpha_in"``.
    """

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
