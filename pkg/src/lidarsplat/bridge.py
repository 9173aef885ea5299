"""Client side of the neural reconstruction bridge.

The bridge peer is a local stream-socket service that accepts one RGDA raw
tensor frame per request and answers with an RGB0 frame of the same size.
Endpoint syntax: "host:port", ":port" (localhost), or "unix:/path".
"""

from __future__ import annotations

import socket

import numpy as np

from .errors import BridgeError, TensorFormatError
from .frame import FrameRGBDA
from .io.tensor import MAGIC_RGB, RawTensorFrame, frame_to_tensor


def _connect(endpoint: str, timeout: float) -> socket.socket:
    try:
        if endpoint.startswith("unix:"):
            sock = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
            sock.settimeout(timeout)
            sock.connect(endpoint[len("unix:"):])
            return sock
        host, _, port = endpoint.rpartition(":")
        sock = socket.create_connection((host or "127.0.0.1", int(port)), timeout=timeout)
        sock.settimeout(timeout)
        return sock
    except (OSError, ValueError) as e:
        raise BridgeError(f"cannot reach bridge at {endpoint!r}: {e}") from None


def reconstruct(frame: FrameRGBDA, endpoint: str, timeout: float = 10.0) -> np.ndarray:
    """Round-trip one frame through the bridge; returns (H, W, 3) float32 rgb."""
    tensor = frame_to_tensor(frame)
    sock = _connect(endpoint, timeout)
    try:
        with sock.makefile("rwb") as stream:
            tensor.write(stream)
            try:
                reply = RawTensorFrame.read(stream)
            except TensorFormatError as e:
                raise BridgeError(f"bad bridge reply: {e}") from None
    except (OSError, socket.timeout) as e:
        raise BridgeError(f"bridge i/o failed: {e}") from None
    finally:
        sock.close()
    if reply.magic != MAGIC_RGB:
        raise BridgeError(f"bridge replied with magic {reply.magic!r}, expected RGB0")
    if reply.planes.shape[1:] != (frame.height, frame.width):
        raise BridgeError(
            f"bridge reply {reply.planes.shape[1:]} does not match "
            f"request {(frame.height, frame.width)}"
        )
    return np.ascontiguousarray(np.moveaxis(reply.planes, 0, 2))
