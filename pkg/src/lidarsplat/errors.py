"""Exception hierarchy for lidarsplat."""


class LidarSplatError(Exception):
    """Base class for all lidarsplat errors."""


class InvalidCloudError(LidarSplatError):
    """Point cloud violates an invariant (empty, non-finite positions, ...)."""


class CameraError(LidarSplatError):
    """Camera intrinsics/pose violate an invariant."""


class PlyParseError(LidarSplatError):
    """Malformed PLY input. Carries the byte offset where parsing failed."""

    def __init__(self, message: str, offset: int = -1):
        self.offset = offset
        if offset >= 0:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


class FrameFormatError(LidarSplatError):
    """Stored frame files are malformed or mutually inconsistent."""


class TensorFormatError(LidarSplatError):
    """Malformed raw tensor frame (bad magic, short read, size mismatch)."""


class DatasetError(LidarSplatError):
    """Dataset layout or manifest problems."""


class BridgeError(LidarSplatError):
    """Neural reconstruction bridge unreachable or misbehaving."""
