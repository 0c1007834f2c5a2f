"""Exception types shared across the package."""


class DmscopeError(Exception):
    """Base class for all package errors."""


class ImageIOError(DmscopeError, OSError):
    """A file could not be read or decoded as an image or label map."""


class UnsupportedFormatError(ImageIOError):
    pass


class CorruptImageError(ImageIOError):
    pass


class LabelRangeError(DmscopeError, ValueError):
    pass


class ShapeMismatchError(DmscopeError, ValueError):
    pass


class EmptyInputError(DmscopeError, ValueError):
    pass


class BinningMismatchError(DmscopeError, ValueError):
    pass


class NormalizationError(DmscopeError, ValueError):
    pass


class UndefinedTauError(DmscopeError, ValueError):
    """Every pair is tied in at least one component, so tau-b has a zero denominator."""


class InsufficientBatchError(DmscopeError, ValueError):
    pass
