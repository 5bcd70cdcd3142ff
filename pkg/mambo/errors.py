"""
Error taxonomy shared by every module.

Everything raised on purpose derives from MamboError so the CLI can map it to
exit code 2. The ValueError/ArithmeticError bases keep plain `except
ValueError` callers working.
"""


class MamboError(Exception):
    """Base class for all deliberate failures"""


class ConfigError(MamboError, ValueError):
    """Invalid configuration value, unknown key or violated config invariant"""


class FormatError(MamboError, ValueError):
    """Malformed file contents (features, checkpoints, protocols, scores)"""


class BadMagicError(FormatError):
    """File does not start with the expected magic bytes"""


class TruncatedError(FormatError):
    """File ends before the declared payload"""


class SizeOverflowError(FormatError):
    """Declared dimensions are too large to be a real payload"""


class ShapeError(MamboError, ValueError):
    """Tensor shapes or sequence lengths do not line up"""


class NonFiniteError(MamboError, ArithmeticError):
    """NaN or infinity in an input, loss or gradient"""


class MissingDependencyError(MamboError, ImportError):
    """An optional library needed for this operation is not installed"""


class RangeError(MamboError, ValueError):
    """A scan coefficient lies outside the range its recurrence needs"""
