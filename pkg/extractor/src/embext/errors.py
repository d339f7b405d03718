"""Error types distinguishing bad inputs from per-file decode trouble."""


class DataError(ValueError):
    """Input that cannot produce any output: bad CSV, no usable audio, bad config."""


class ModelLoadError(DataError):
    """The configured model could not be loaded."""


class AudioDecodeError(ValueError):
    """One audio file could not be decoded; callers may skip and continue."""
