class WatermarkError(Exception):
    """Base class for every error raised by the toolkit."""


class ParameterError(WatermarkError, ValueError):
    """A precondition, range or dimension check failed."""


class DomainError(ParameterError):
    """A real-valued argument lies outside the domain of the map."""


class DegenerateKeystreamError(WatermarkError):
    """The chaotic system collapsed; the caller must choose other parameters."""


class FileAccessError(WatermarkError, OSError):
    """An image or key file could not be read or written."""
