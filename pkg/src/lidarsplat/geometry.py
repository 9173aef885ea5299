"""Camera model, rigid poses, pinhole projection and view frustum extraction.

Convention: camera frame is +x right, +y down, +z forward. A world point P
maps to pixel (u, v) = (fx*X/Z + cx, fy*Y/Z + cy) where (X, Y, Z) is P in
the camera frame. Projection arithmetic is pinned to float64 with
left-associated products (see _kernels) so every code path is bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CameraError

ORTHO_TOL = 1e-6
FRUSTUM_SLACK = 1e-5  # meters; see extract_frustum contract


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation, applied as p' = R @ p + t."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = np.ascontiguousarray(self.rotation, dtype=np.float64)
        tr = np.ascontiguousarray(self.translation, dtype=np.float64)
        if rot.shape != (3, 3) or tr.shape != (3,):
            raise CameraError("rigid transform needs a 3x3 rotation and 3-vector")
        if not np.allclose(rot.T @ rot, np.eye(3), atol=ORTHO_TOL):
            raise CameraError("rotation is not orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > ORTHO_TOL:
            raise CameraError("rotation determinant is not +1")
        rot.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tr)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "RigidTransform":
        mat = np.asarray(mat, dtype=np.float64)
        if mat.shape != (4, 4) or not np.allclose(mat[3], [0, 0, 0, 1], atol=1e-9):
            raise CameraError("expected a rigid 4x4 matrix with bottom row 0 0 0 1")
        return cls(mat[:3, :3], mat[:3, 3])

    def inverse(self) -> "RigidTransform":
        rot_inv = self.rotation.T.copy()
        return RigidTransform(rot_inv, -(rot_inv @ self.translation))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera: intrinsics, image size, world-to-camera pose, depth range."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    world_to_camera: RigidTransform = field(default_factory=RigidTransform.identity)
    z_near: float = 0.1
    z_far: float = 100.0

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise CameraError("focal lengths must be positive")
        if not (0 < self.z_near < self.z_far):
            raise CameraError("need 0 < z_near < z_far")
        for name, v in (("width", self.width), ("height", self.height)):
            if v < 16 or v % 16 != 0:
                raise CameraError(f"{name} must be >= 16 and divisible by 16, got {v}")

    def with_pose(self, world_to_camera: RigidTransform) -> "CameraModel":
        return CameraModel(
            self.fx, self.fy, self.cx, self.cy, self.width, self.height,
            world_to_camera, self.z_near, self.z_far,
        )

    def project(self, points: np.ndarray):
        """World points (N, 3) -> (u, v, z) float64 arrays, z in the camera frame.

        Uses the pinned kernel arithmetic; no in-bounds or depth test here.
        Points at or behind z = 0 yield non-finite u/v.
        """
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        rot = self.world_to_camera.rotation
        t = self.world_to_camera.translation
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        xc = (rot[0, 0] * x + rot[0, 1] * y) + rot[0, 2] * z + t[0]
        yc = (rot[1, 0] * x + rot[1, 1] * y) + rot[1, 2] * z + t[1]
        zc = (rot[2, 0] * x + rot[2, 1] * y) + rot[2, 2] * z + t[2]
        with np.errstate(divide="ignore", invalid="ignore"):
            invz = 1.0 / zc
            u = (self.fx * xc) * invz + self.cx
            v = (self.fy * yc) * invz + self.cy
        return u, v, zc


@dataclass(frozen=True)
class Frustum:
    """Six inward-facing world-frame planes (nx, ny, nz, d): inside <=> n.p + d >= 0."""

    planes: np.ndarray  # (6, 4) float64, unit normals

    def __post_init__(self):
        planes = np.ascontiguousarray(self.planes, dtype=np.float64)
        if planes.shape != (6, 4):
            raise CameraError(f"frustum needs 6 planes, got shape {planes.shape}")
        norms = np.linalg.norm(planes[:, :3], axis=1)
        if not np.allclose(norms, 1.0, atol=1e-6):
            raise CameraError("frustum plane normals must be unit length")
        planes.setflags(write=False)
        object.__setattr__(self, "planes", planes)

    def contains(self, points: np.ndarray, slack: float = FRUSTUM_SLACK) -> np.ndarray:
        """Boolean mask: inside all six planes within `slack` meters."""
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        dist = pts @ self.planes[:, :3].T + self.planes[:, 3]
        return (dist >= -slack).all(axis=1)


def extract_frustum(camera: CameraModel) -> Frustum:
    """Frustum of `camera` in the world frame.

    A point with z_near <= Z <= z_far projecting into [0, W] x [0, H] lies on
    the inward side of all six planes (within FRUSTUM_SLACK meters).
    """
    w, h = float(camera.width), float(camera.height)
    cam_planes = np.array(
        [
            [0.0, 0.0, 1.0, -camera.z_near],          # near:  Z >= z_near
            [0.0, 0.0, -1.0, camera.z_far],           # far:   Z <= z_far
            [camera.fx, 0.0, camera.cx, 0.0],         # left:  u >= 0
            [-camera.fx, 0.0, w - camera.cx, 0.0],    # right: u <= W
            [0.0, camera.fy, camera.cy, 0.0],         # top:   v >= 0
            [0.0, -camera.fy, h - camera.cy, 0.0],    # bottom: v <= H
        ],
        dtype=np.float64,
    )
    cam_planes[:, :4] /= np.linalg.norm(cam_planes[:, :3], axis=1, keepdims=True)
    rot = camera.world_to_camera.rotation
    t = camera.world_to_camera.translation
    world = np.empty_like(cam_planes)
    world[:, :3] = cam_planes[:, :3] @ rot          # R^T applied to each normal
    world[:, 3] = cam_planes[:, :3] @ t + cam_planes[:, 3]
    return Frustum(world)


def unproject(pixel, depth: float, camera: CameraModel) -> np.ndarray:
    """Pixel (u, v) + camera-frame depth -> world point through the pixel center.

    Inverse of projection: reprojecting the result lands on (u + 0.5, v + 0.5).
    """
    if depth <= 0:
        raise ValueError(f"depth must be positive, got {depth}")
    u, v = float(pixel[0]), float(pixel[1])
    z = float(depth)
    cam = np.array(
        [
            (u + 0.5 - camera.cx) * z / camera.fx,
            (v + 0.5 - camera.cy) * z / camera.fy,
            z,
        ]
    )
    pose = camera.world_to_camera
    return pose.rotation.T @ (cam - pose.translation)
