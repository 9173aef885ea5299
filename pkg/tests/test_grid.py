import numpy as np
import pytest

from lidarsplat import PointCloud, build_grid, cull_cells, extract_frustum
from lidarsplat.errors import InvalidCloudError

from conftest import make_camera, random_cloud, random_view


def test_single_point_single_cell():
    cloud = PointCloud(np.zeros((1, 3), np.float32), np.zeros((1, 3), np.uint8))
    grid = build_grid(cloud, 1.0)
    assert tuple(grid.dims) == (1, 1, 1)
    assert grid.point_order.tolist() == [0]
    assert grid.cell_offsets.tolist() == [0, 1]


def test_unit_cube_corners_distinct_cells():
    corners = np.array(
        [[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], np.float32
    )
    cloud = PointCloud(corners, np.zeros((8, 3), np.uint8))
    grid = build_grid(cloud, 0.5)
    occupied = grid.occupied_cells()
    assert len(occupied) == 8
    for cell in occupied:
        assert grid.cell_points(cell).size == 1


def test_cell_assignment_matches_floor_formula(rng):
    cloud = random_cloud(rng, 5000, extent=7.3, offset=-2.0)
    grid = build_grid(cloud, 0.83)
    origin, size = grid.origin, grid.cell_size
    for i in rng.choice(cloud.count, 200, replace=False):
        p = cloud.positions[i].astype(np.float64)
        idx = np.floor((p - origin) / size).astype(np.int64)
        idx = np.clip(idx, 0, grid.dims - 1)
        cell = (idx[0] * grid.dims[1] + idx[1]) * grid.dims[2] + idx[2]
        assert i in grid.cell_points(cell)


def test_every_point_recovered_exactly_once(rng):
    cloud = random_cloud(rng, 100_000, extent=10.0)
    grid = build_grid(cloud, 1.0)
    seen = np.concatenate([grid.cell_points(c) for c in range(grid.n_cells)])
    assert np.array_equal(np.sort(seen), np.arange(cloud.count))
    assert grid.cell_offsets[-1] == cloud.count
    assert (np.diff(grid.cell_offsets) >= 0).all()


def test_empty_cloud_rejected():
    with pytest.raises(InvalidCloudError, match="positions must be"):
        PointCloud(np.zeros((0,), np.float32), np.zeros((0,), np.uint8))
    cloud = PointCloud(np.zeros((0, 3), np.float32), np.zeros((0, 3), np.uint8))
    with pytest.raises(InvalidCloudError, match="empty cloud"):
        build_grid(cloud, 1.0)


def test_nonfinite_point_rejected():
    pos = np.array([[0, 0, np.nan]], np.float32)
    with pytest.raises(InvalidCloudError, match="invalid point"):
        PointCloud(pos, np.zeros((1, 3), np.uint8))


def test_cull_full_containment(rng):
    cloud = random_cloud(rng, 2000, extent=2.0, offset=-1.0)
    grid = build_grid(cloud, 0.5)
    camera = make_camera(eye=(0.0, 0.0, -50.0), width=128, height=128, fx=2000.0)
    frustum = extract_frustum(camera)
    culled = cull_cells(grid, frustum)
    assert np.array_equal(culled, grid.occupied_cells())


def test_cull_camera_facing_away(rng):
    cloud = random_cloud(rng, 2000, extent=2.0, offset=1.0)  # all in +octant
    grid = build_grid(cloud, 0.5)
    camera = make_camera(eye=(0, 0, 10), target=(0, 0, 100))  # looking away
    frustum = extract_frustum(camera)
    culled = cull_cells(grid, frustum)
    indices = grid.gather_points(culled)
    if indices.size:
        u, v, z = camera.project(cloud.positions[indices])
        visible = (
            (z >= camera.z_near) & (z <= camera.z_far)
            & (u >= 0) & (u < camera.width) & (v >= 0) & (v < camera.height)
        )
        assert not visible.any()


def test_cull_is_conservative_superset(rng):
    for trial in range(5):
        cloud = random_cloud(rng, 20_000, extent=8.0)
        grid = build_grid(cloud, 1.0)
        camera = random_view(rng, cloud)
        culled = set(cull_cells(grid, extract_frustum(camera)).tolist())
        u, v, z = camera.project(cloud.positions)
        visible = (
            (z >= camera.z_near) & (z <= camera.z_far)
            & (u >= 0) & (u < camera.width) & (v >= 0) & (v < camera.height)
        )
        ids = np.arange(cloud.count)[visible]
        cell_of = {}
        for c in grid.occupied_cells():
            for i in grid.cell_points(c):
                cell_of[i] = c
        for i in ids:
            assert cell_of[i] in culled


def test_grid_too_fine_rejected(rng):
    cloud = random_cloud(rng, 10, extent=1000.0)
    with pytest.raises(InvalidCloudError, match="cells exceeds"):
        build_grid(cloud, 1e-4)
