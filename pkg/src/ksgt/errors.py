"""Exception hierarchy shared by all ksgt modules."""


class GroupTestingError(Exception):
    """Base class for every error raised by this package."""


class NotPrime(GroupTestingError, ValueError):
    pass


class DivisionByZero(GroupTestingError, ZeroDivisionError):
    pass


class Infeasible(GroupTestingError, ValueError):
    """Parameters cannot be realized (e.g. more evaluation points than field elements)."""


class BadMessageLength(GroupTestingError, ValueError):
    pass


class IndexOutOfRange(GroupTestingError, IndexError):
    pass


class TooManyItems(GroupTestingError, ValueError):
    pass


class BadDensity(GroupTestingError, ValueError):
    pass


class WidthMismatch(GroupTestingError, ValueError):
    pass


class FormatError(GroupTestingError, ValueError):
    """Malformed matrix or metadata file."""


class LengthMismatch(GroupTestingError, ValueError):
    pass


class BadNoise(GroupTestingError, ValueError):
    """Noise probability or threshold slack outside its valid range."""


class TooLarge(GroupTestingError, ValueError):
    """Brute-force enumeration would exceed its guard."""


class BadSize(GroupTestingError, ValueError):
    pass


class ConfigError(GroupTestingError, ValueError):
    """Invalid simulation or CLI configuration."""
