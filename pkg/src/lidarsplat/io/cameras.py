"""Camera file: shared pinhole intrinsics plus per-frame camera-to-world poses.

JSON schema:
  {"intrinsics": {"fx","fy","cx","cy","width","height"},
   "frames": [{"id": str, "camera_to_world": [16 numbers, row-major 4x4]}]}
Convention +x right, +y down, +z forward; poses are inverted on load to give
world-to-camera transforms.
"""

from __future__ import annotations

import json

import numpy as np

from ..errors import CameraError
from ..geometry import CameraModel, RigidTransform


def load_cameras(path, z_near: float = 0.1, z_far: float = 100.0) -> dict:
    """Returns {frame_id: CameraModel}; insertion order follows the file."""
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise CameraError(f"camera file is not valid JSON: {e}") from None
    try:
        intr = doc["intrinsics"]
        base = CameraModel(
            fx=float(intr["fx"]), fy=float(intr["fy"]),
            cx=float(intr["cx"]), cy=float(intr["cy"]),
            width=int(intr["width"]), height=int(intr["height"]),
            z_near=z_near, z_far=z_far,
        )
        frames = doc["frames"]
    except (KeyError, TypeError) as e:
        raise CameraError(f"camera file missing field: {e}") from None
    cameras = {}
    for i, entry in enumerate(frames):
        try:
            frame_id = str(entry["id"])
            mat = np.array(entry["camera_to_world"], dtype=np.float64).reshape(4, 4)
        except (KeyError, TypeError, ValueError) as e:
            raise CameraError(f"frame {i}: {e}") from None
        if frame_id in cameras:
            raise CameraError(f"duplicate frame id {frame_id!r}")
        c2w = RigidTransform.from_matrix(mat)
        cameras[frame_id] = base.with_pose(c2w.inverse())
    if not cameras:
        raise CameraError("camera file has no frames")
    return cameras


def save_cameras(path, intrinsics: dict, frames) -> None:
    """frames: iterable of (id, camera_to_world 4x4)."""
    doc = {
        "intrinsics": {k: intrinsics[k] for k in ("fx", "fy", "cx", "cy", "width", "height")},
        "frames": [
            {"id": str(fid), "camera_to_world": np.asarray(mat, dtype=float).reshape(16).tolist()}
            for fid, mat in frames
        ],
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
