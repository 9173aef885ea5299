import numpy as np
import pytest

from lidarsplat import CameraModel, PointCloud, RigidTransform


def look_at(eye, target, up=(0.0, 0.0, 1.0)) -> RigidTransform:
    """world-to-camera pose: +z toward target, +y down-ish relative to `up`."""
    eye = np.asarray(eye, dtype=np.float64)
    fwd = np.asarray(target, dtype=np.float64) - eye
    fwd = fwd / np.linalg.norm(fwd)
    down = -np.asarray(up, dtype=np.float64)
    right = np.cross(down, fwd)
    if np.linalg.norm(right) < 1e-9:
        down = np.array([0.0, 1.0, 0.0])
        right = np.cross(down, fwd)
    right = right / np.linalg.norm(right)
    down = np.cross(fwd, right)
    rot = np.stack([right, down, fwd])
    return RigidTransform(rot, -(rot @ eye))


def make_camera(
    eye=(0.0, 0.0, 0.0),
    target=None,
    width=64,
    height=48,
    fx=50.0,
    fy=50.0,
    z_near=0.1,
    z_far=100.0,
) -> CameraModel:
    if target is None:
        pose = RigidTransform(np.eye(3), -np.asarray(eye, dtype=np.float64))
    else:
        pose = look_at(eye, target)
    return CameraModel(
        fx=fx, fy=fy, cx=width / 2.0, cy=height / 2.0,
        width=width, height=height,
        world_to_camera=pose, z_near=z_near, z_far=z_far,
    )


def random_cloud(rng: np.random.Generator, n: int, extent=10.0, offset=0.0) -> PointCloud:
    positions = (rng.random((n, 3)) * extent + offset).astype(np.float32)
    colors = rng.integers(0, 256, size=(n, 3), dtype=np.uint8)
    return PointCloud(positions, colors)


def random_view(rng: np.random.Generator, cloud: PointCloud, **camera_kw) -> CameraModel:
    """A camera placed outside the cloud bbox, looking at a random point in it."""
    lo = cloud.positions.min(axis=0).astype(np.float64)
    hi = cloud.positions.max(axis=0).astype(np.float64)
    center = (lo + hi) / 2
    radius = float(np.linalg.norm(hi - lo)) / 2 + 1.0
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    eye = center + direction * radius * (1.0 + rng.random())
    target = lo + rng.random(3) * (hi - lo)
    cam = make_camera(**camera_kw)
    return cam.with_pose(look_at(eye, target))


def two_plane_cloud(camera: CameraModel, front=1.0, back=5.0):
    """One point per pixel at exact pixel-center rays: front depth on the
    (u+v even) checkerboard, back depth elsewhere. Projecting this cloud
    through `camera` fills every pixel with exactly one point.
    """
    w, h = camera.width, camera.height
    us, vs = np.meshgrid(np.arange(w), np.arange(h))
    checker = (us + vs) % 2 == 0
    depth = np.where(checker, front, back).astype(np.float64)
    x = (us + 0.5 - camera.cx) / camera.fx * depth
    y = (vs + 0.5 - camera.cy) / camera.fy * depth
    cam_pts = np.stack([x, y, depth], axis=-1).reshape(-1, 3)
    pose = camera.world_to_camera
    world = (cam_pts - pose.translation) @ pose.rotation  # R^T (p - t)
    colors = np.where(
        checker.reshape(-1, 1), (200, 60, 60), (60, 60, 200)
    ).astype(np.uint8)
    cloud = PointCloud(world.astype(np.float32), colors)
    return cloud, checker


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
