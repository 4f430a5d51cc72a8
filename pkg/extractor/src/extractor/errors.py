class ExtractorError(Exception):
    """Base class for extraction failures."""


class UsageError(ExtractorError):
    """Bad command-line arguments."""


class DecodeError(ExtractorError):
    """Video cannot be opened or decoded."""


class ModelLoadError(ExtractorError):
    """A descriptor model identifier cannot be resolved or loaded."""
