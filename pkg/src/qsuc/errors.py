"""Exception types shared across the package."""


class QsucError(Exception):
    """Base class for package-specific failures."""


class ParameterError(QsucError, ValueError):
    """A user-supplied parameter violates its documented precondition."""


class SizeLimitError(QsucError, ValueError):
    """A desk-scale size guard (exhaustive search, dense diagonal) was exceeded."""


class EncodingRangeError(QsucError, ValueError):
    """The binary encoding cannot represent a value the master problem needs.

    Raised instead of silently clipping: a clipped bound value would make the
    Benders lower bound invalid. Increase ``chi`` or ``levels``.
    """


class TransportError(QsucError, RuntimeError):
    """The remote annealer endpoint could not be reached."""


class RemoteProtocolError(QsucError, RuntimeError):
    """The remote annealer returned a malformed or incomplete response."""


class RemoteVerificationError(QsucError, RuntimeError):
    """A remote result failed local re-evaluation (reported energy is wrong)."""


class NumericalError(QsucError, RuntimeError):
    """An iterative numerical routine failed to reach its tolerance."""
