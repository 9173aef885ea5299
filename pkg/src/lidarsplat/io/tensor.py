"""Raw tensor frame: the framed float32 interchange format of the bridge.

Layout: 4-byte magic, then width/height/channels as little-endian uint32,
then width*height*channels float32 values plane-major (channel 0 complete,
then channel 1, ...). Magics: "RGDA" = 5-channel RGBDA input, "RGB0" =
3-channel image. Reads and writes stream in bounded chunks.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..errors import TensorFormatError
from ..frame import FrameRGBDA

MAGIC_RGBDA = b"RGDA"
MAGIC_RGB = b"RGB0"
_CHANNELS = {MAGIC_RGBDA: 5, MAGIC_RGB: 3}
_CHUNK = 1 << 22  # 4 MiB
_MAX_PAYLOAD = 1 << 33


def _read_exact_into(stream, view: memoryview, what: str) -> None:
    got = 0
    while got < len(view):
        if hasattr(stream, "readinto"):
            n = stream.readinto(view[got:])
            if not n:
                raise TensorFormatError(
                    f"short read: {what} ended after {got} of {len(view)} bytes"
                )
            got += n
        else:
            chunk = stream.read(min(_CHUNK, len(view) - got))
            if not chunk:
                raise TensorFormatError(
                    f"short read: {what} ended after {got} of {len(view)} bytes"
                )
            view[got : got + len(chunk)] = chunk
            got += len(chunk)


@dataclass
class RawTensorFrame:
    """A framed plane-major float32 tensor (channels, height, width)."""

    magic: bytes
    planes: np.ndarray

    def __post_init__(self):
        if self.magic not in _CHANNELS:
            raise TensorFormatError(f"unknown magic {self.magic!r}")
        planes = np.ascontiguousarray(self.planes, dtype=np.float32)
        if planes.ndim != 3 or planes.shape[0] != _CHANNELS[self.magic]:
            raise TensorFormatError(
                f"magic {self.magic.decode()} needs {_CHANNELS[self.magic]} "
                f"channel planes, got shape {planes.shape}"
            )
        self.planes = planes

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def channels(self) -> int:
        return self.planes.shape[0]

    def write(self, stream) -> None:
        stream.write(
            self.magic
            + struct.pack("<III", self.width, self.height, self.channels)
        )
        raw = memoryview(self.planes).cast("B")
        for off in range(0, len(raw), _CHUNK):
            stream.write(raw[off : off + _CHUNK])
        if hasattr(stream, "flush"):
            stream.flush()

    @classmethod
    def read(cls, stream) -> "RawTensorFrame":
        header = bytearray(16)
        _read_exact_into(stream, memoryview(header), "header")
        magic = bytes(header[:4])
        if magic not in _CHANNELS:
            raise TensorFormatError(f"unknown magic {magic!r}")
        width, height, channels = struct.unpack("<III", header[4:])
        if channels != _CHANNELS[magic]:
            raise TensorFormatError(
                f"magic {magic.decode()} implies {_CHANNELS[magic]} channels, "
                f"header says {channels}"
            )
        nbytes = width * height * channels * 4
        if width == 0 or height == 0 or nbytes > _MAX_PAYLOAD:
            raise TensorFormatError(f"implausible dimensions {width}x{height}")
        planes = np.empty((channels, height, width), dtype=np.float32)
        _read_exact_into(stream, memoryview(planes).cast("B"), "payload")
        return cls(magic, planes)


def frame_to_tensor(frame: FrameRGBDA) -> RawTensorFrame:
    planes = np.empty((5, frame.height, frame.width), dtype=np.float32)
    planes[0] = frame.rgb[:, :, 0]
    planes[1] = frame.rgb[:, :, 1]
    planes[2] = frame.rgb[:, :, 2]
    planes[3] = frame.depth
    planes[4] = frame.alpha
    return RawTensorFrame(MAGIC_RGBDA, planes)


def tensor_to_frame(tensor: RawTensorFrame) -> FrameRGBDA:
    if tensor.magic != MAGIC_RGBDA:
        raise TensorFormatError(f"expected RGDA tensor, got {tensor.magic!r}")
    rgb = np.ascontiguousarray(np.moveaxis(tensor.planes[:3], 0, 2))
    frame = FrameRGBDA(
        rgb=rgb,
        depth=tensor.planes[3].copy(),
        alpha=(tensor.planes[4] > 0.5).astype(np.uint8),
    )
    frame.validate()
    return frame
