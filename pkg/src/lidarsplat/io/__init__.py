"""Bit-exact readers and writers for every on-disk and on-wire format."""

from .cameras import load_cameras, save_cameras
from .dataset import DatasetManifest, load_manifest, save_manifest
from .frames import load_image_rgb, read_frame, read_pfm, save_image_rgb, write_frame, write_pfm
from .ply import load_ply, save_ply
from .tensor import (
    MAGIC_RGB,
    MAGIC_RGBDA,
    RawTensorFrame,
    frame_to_tensor,
    tensor_to_frame,
)

__all__ = [
    "DatasetManifest",
    "MAGIC_RGB",
    "MAGIC_RGBDA",
    "RawTensorFrame",
    "frame_to_tensor",
    "load_cameras",
    "load_image_rgb",
    "load_manifest",
    "load_ply",
    "read_frame",
    "read_pfm",
    "save_cameras",
    "save_image_rgb",
    "save_manifest",
    "save_ply",
    "tensor_to_frame",
    "write_frame",
    "write_pfm",
]
