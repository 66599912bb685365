"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration value or malformed config file."""


class PlacementError(RuntimeError):
    """Separated blob centres could not be placed within the retry budget."""


class VariantMismatchError(ValueError):
    """Decoder parameters of the wrong variant were supplied."""


class ShapeError(ValueError):
    """Array shapes or aligned-list lengths do not match."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss; the message names the step."""


class FormatError(ValueError):
    """Binary container or manifest violates the on-disk format."""


class MissingArtifactError(FileNotFoundError):
    """A run directory lacks an artifact required by the command."""


class LoopFailureError(RuntimeError):
    """Every decoder candidate failed during the looping procedure."""
