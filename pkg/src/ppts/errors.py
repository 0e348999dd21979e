"""Exception hierarchy shared by every module in the package."""


class PPTSError(Exception):
    """Base class for all package errors."""


class ParameterError(PPTSError, ValueError):
    """An argument violates a documented precondition."""


class CryptoError(PPTSError):
    """Key generation or decryption failed."""


class ProtocolAbort(PPTSError):
    """A protocol run had to stop (transport failure, missing share, ...)."""

    def __init__(self, message, transcript=None):
        super().__init__(message)
        self.transcript = transcript


class TranscriptParseError(PPTSError, ValueError):
    """A transcript file or record could not be decoded."""
