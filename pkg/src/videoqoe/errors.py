"""Exception hierarchy shared across the package.

Every error raised on purpose derives from VideoQoeError so callers can
catch the whole family.  The CLI maps each branch to a stable exit code.
"""


class VideoQoeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(VideoQoeError, ValueError):
    """Invalid configuration value or combination."""


class SchemaError(ConfigError):
    """Structurally invalid manifest or config document."""


class LabelError(ConfigError):
    """Class label outside the declared range."""


class DomainError(ConfigError):
    """Physical quantity outside its valid domain (zero RTT, negative loss...)."""


class AggregationError(ConfigError):
    """Aggregation over an empty or malformed collection."""


class FormatError(VideoQoeError, ValueError):
    """Byte-level file content does not match the declared format."""


class NumericError(VideoQoeError, ArithmeticError):
    """Non-finite value produced or supplied where finite math is required."""


class DivergenceError(NumericError):
    """Training produced a non-finite loss or weight."""


class DimensionError(VideoQoeError, ValueError):
    """Tensor shape mismatch or invalid extent."""


class InternalError(VideoQoeError, RuntimeError):
    """Internal consistency violated; indicates a bug, not bad input."""


# CLI exit codes.  0 is success; anything unlisted is an unexpected crash.
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NUMERIC = 3
EXIT_DIMENSION = 4


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code documented in the README."""
    if isinstance(exc, (DimensionError, InternalError)):
        return EXIT_DIMENSION
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    if isinstance(exc, FormatError):
        return EXIT_IO
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, OSError):
        return EXIT_IO
    raise exc
