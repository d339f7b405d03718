"""Exception types shared across the package."""


class DataError(ValueError):
    """Invalid input data: malformed files, impossible requests, bad shapes."""


class FormatError(DataError):
    """An embedding file or manifest violates the exchange format."""


class BadMagicError(FormatError):
    """File does not start with the EMB1 magic bytes."""


class UnsupportedVersionError(FormatError):
    """Header declares a format version this reader does not speak."""


class ZeroShapeError(FormatError):
    """Header declares zero rows or zero columns."""


class UnknownDtypeError(FormatError):
    """Header declares an element type code this reader does not know."""


class PayloadSizeError(FormatError):
    """Payload byte count disagrees with the header's row/column counts."""


class NonFinitePayloadError(FormatError):
    """Payload contains NaN or infinite values."""


class NumericError(RuntimeError):
    """Optimization produced a non-finite loss or gradient."""
