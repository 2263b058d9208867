"""Exception types shared across the library."""


class DocgrungeError(Exception):
    """Base class for all library errors."""


class DecodeError(DocgrungeError):
    """Raised when an image byte stream cannot be decoded."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"cannot decode image at byte offset {offset}: {message}")
        self.offset = offset


class UnsupportedFormatError(DocgrungeError):
    """Raised for encode/decode requests outside the supported formats."""


class RasterError(DocgrungeError):
    """Raised for invalid raster construction or geometry."""


class PlacementError(DocgrungeError):
    """Raised when a foreground cannot be placed onto a background."""


class ParamError(DocgrungeError):
    """Raised when effect parameters fail schema validation."""


class SpecError(DocgrungeError):
    """Pipeline spec validation failure.

    Carries a JSON-pointer style ``pointer`` locating the offending value,
    e.g. ``/ink/2/p``.
    """

    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        if pointer:
            super().__init__(f"{message} at {pointer}")
        else:
            super().__init__(message)


class EffectError(DocgrungeError):
    """Failure inside one pipeline node, tagged with its position."""

    def __init__(self, phase: str, index: int, kind: str, cause: Exception):
        super().__init__(f"effect '{kind}' failed in phase '{phase}' at index {index}: {cause}")
        self.phase = phase
        self.index = index
        self.kind = kind
        self.cause = cause


class ConfigError(DocgrungeError):
    """Raised for unusable runtime configuration (missing dirs, bad values)."""


class MetricError(DocgrungeError):
    """Raised when a metric's preconditions are not met."""
