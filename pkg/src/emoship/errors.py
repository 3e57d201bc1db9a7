"""Exception hierarchy shared across the pipeline."""


class EmoshipError(Exception):
    """Base class for all errors raised by this package."""


class IntegrityError(EmoshipError):
    """A stored artifact (tensor archive, fixture) fails its byte-level contract."""


class DataError(EmoshipError):
    """Input data (manifest, record, sample) violates a documented invariant."""


class ModelError(EmoshipError):
    """Model parameters are inconsistent with the configured dimensions."""


class InsufficientDataError(EmoshipError):
    """Too few samples to classify a gaze window."""


class ProtocolError(EmoshipError):
    """A provider payload does not match the wire protocol."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class ProviderUnavailableError(EmoshipError):
    """The provider could not be reached (timeout, dead process, refused connection)."""


class DivergenceError(EmoshipError):
    """Training produced a non-finite loss."""

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class InputError(EmoshipError):
    """CLI / evaluation input is malformed or misaligned."""
