"""Exception hierarchy shared by every module."""


class AinfError(Exception):
    """Base class for all library errors."""


class RingMismatch(AinfError):
    pass


class TruncationOverflow(AinfError):
    """A Laurent exponent fell below the configured floor."""


class PrecisionExhausted(AinfError):
    """Perfection depth or p-adic length ran out."""


class NotAUnit(AinfError):
    pass


class ResourceBound(AinfError):
    """A configured size cap (symbolic terms, dimension, enumeration) was hit."""


class BadWitness(AinfError):
    pass


class NormTooLarge(AinfError):
    pass


class NotPrimitive(AinfError):
    pass


class ZeroDivisor(AinfError):
    pass


class UnsupportedCovering(AinfError):
    pass


class NonConvergent(AinfError):
    pass


class ApproximantNotFound(AinfError):
    pass


class ConfigInvalid(AinfError):
    pass
