"""Exception types raised across the package."""


class HMError(Exception):
    """Base class for all hmcolor errors."""


class DomainError(HMError, ValueError):
    """An operand lies outside the domain of the operation (e.g. 0 ** -1)."""


class MismatchedExponent(HMError, ValueError):
    pass


class UnsupportedExponent(HMError, ValueError):
    pass


class VectorHasNoProjection(HMError, ValueError):
    pass


class DegenerateWeight(HMError, ValueError):
    pass


class DimensionMismatch(HMError, ValueError):
    pass


class NotAVector(HMError, ValueError):
    pass


class InvalidMatrix(HMError, ValueError):
    pass


class UnknownPreset(HMError, KeyError):
    def __str__(self):
        # KeyError would repr() the message
        return str(self.args[0]) if self.args else ""


class ImageIOError(HMError, OSError):
    pass
