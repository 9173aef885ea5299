import json
from pathlib import Path

import numpy as np
import pytest

from lidarsplat import (
    AugmentParams,
    FilterParams,
    RenderParams,
    augment_brightness_contrast,
    build_grid,
    generate_dataset,
    make_filtered_pair,
    make_leaky_pair,
    project_points,
    depth_filter,
)
from lidarsplat.errors import DatasetError
from lidarsplat.io.dataset import load_manifest, pair_paths
from lidarsplat.io.frames import read_frame, load_image_rgb

from conftest import make_camera, two_plane_cloud


@pytest.fixture
def scene(rng):
    cam = make_camera()
    cloud, checker = two_plane_cloud(cam)
    gt = rng.random((cam.height, cam.width, 3)).astype(np.float32) * 0.8 + 0.1
    grid = build_grid(cloud, 1.0)
    return cloud, grid, cam, gt, checker


FP = FilterParams(levels_n=3, filter_strength=0.5)
RP = RenderParams()


# --- augmentation -----------------------------------------------------------

def test_augment_identity_ranges(rng):
    img = rng.random((32, 32, 3)).astype(np.float32)
    alpha = np.ones((32, 32), np.uint8)
    params = AugmentParams(
        brightness_delta_range=(0.0, 0.0), contrast_scale_range=(1.0, 1.0), seed=7
    )
    out = augment_brightness_contrast(img, alpha, params)
    assert np.array_equal(out, img)


def test_augment_affine_formula():
    img = np.full((8, 8, 3), 0.75, np.float32)
    img[:4] = 0.5
    alpha = np.ones((8, 8), np.uint8)
    params = AugmentParams(
        brightness_delta_range=(0.0, 0.0),
        contrast_scale_range=(2.0, 2.0),
        group_count_range=(1, 1),
        seed=3,
    )
    out = augment_brightness_contrast(img, alpha, params)
    assert np.allclose(out[:4], 0.5)   # 2*(0.5-0.5)+0.5
    assert np.allclose(out[4:], 1.0)   # 2*0.25+0.5 = 1.0 exactly at the clamp

def test_augment_leaves_empty_pixels(rng):
    img = rng.random((16, 16, 3)).astype(np.float32)
    alpha = (rng.random((16, 16)) < 0.5).astype(np.uint8)
    params = AugmentParams(seed=11)
    out = augment_brightness_contrast(img, alpha, params)
    empty = ~alpha.astype(bool)
    assert np.array_equal(out[empty], img[empty])


def test_augment_determinism(rng):
    img = rng.random((32, 32, 3)).astype(np.float32)
    alpha = np.ones((32, 32), np.uint8)
    a = augment_brightness_contrast(img, alpha, AugmentParams(seed=42))
    b = augment_brightness_contrast(img, alpha, AugmentParams(seed=42))
    c = augment_brightness_contrast(img, alpha, AugmentParams(seed=43))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


# --- pairs --------------------------------------------------------------------

def test_filtered_pair_mask_consistency(scene):
    cloud, grid, cam, gt, checker = scene
    pair = make_filtered_pair(cloud, grid, gt, cam, FP, RP, pair_id="p")
    filled = pair.input.alpha.astype(bool)
    assert np.array_equal(pair.input.rgb[filled], gt[filled])
    assert (pair.input.rgb[~filled] == 0).all()
    assert np.array_equal(pair.target, gt)
    pair.input.validate()


def test_filtered_pair_uses_filtered_channels(scene):
    cloud, grid, cam, gt, checker = scene
    pair = make_filtered_pair(cloud, grid, gt, cam, FP, RP)
    raw = project_points(cloud, grid, cam, RP)
    filt = depth_filter(raw, FP)
    assert np.array_equal(pair.input.depth, filt.depth)
    assert np.array_equal(pair.input.alpha, filt.alpha)


def test_leaky_pair_three_way_partition(scene):
    cloud, grid, cam, gt, checker = scene
    pair = make_leaky_pair(cloud, grid, gt, cam, FP, RP)
    raw = project_points(cloud, grid, cam, RP)
    keep = depth_filter(raw, FP).alpha.astype(bool)
    filled = raw.alpha.astype(bool)
    background = filled & ~keep
    assert np.array_equal(pair.input.alpha, raw.alpha)
    assert np.array_equal(pair.input.depth, raw.depth)
    assert np.array_equal(pair.input.rgb[keep], gt[keep])
    assert np.array_equal(pair.input.rgb[background], raw.rgb[background])
    assert (pair.input.rgb[~filled] == 0).all()
    # this scene has real leakage, so the partition is non-trivial
    assert background.any() and keep.any()


def test_leaky_equals_filtered_without_background(rng):
    cam = make_camera()
    # single flat wall: nothing to classify as background
    w, h = cam.width, cam.height
    us, vs = np.meshgrid(np.arange(w), np.arange(h))
    d = 2.0
    x = (us + 0.5 - cam.cx) / cam.fx * d
    y = (vs + 0.5 - cam.cy) / cam.fy * d
    pts = np.stack([x, y, np.full_like(x, d)], -1).reshape(-1, 3).astype(np.float32)
    from lidarsplat import PointCloud

    cloud = PointCloud(pts, np.full((pts.shape[0], 3), 128, np.uint8))
    grid = build_grid(cloud, 1.0)
    gt = rng.random((h, w, 3)).astype(np.float32)
    a = make_filtered_pair(cloud, grid, gt, cam, FP, RP)
    b = make_leaky_pair(cloud, grid, gt, cam, FP, RP)
    assert np.array_equal(a.input.rgb, b.input.rgb)
    assert np.array_equal(a.input.depth, b.input.depth)
    assert np.array_equal(a.input.alpha, b.input.alpha)


def test_pair_empty_projection(rng):
    cam = make_camera(eye=(1000.0, 1000.0, 1000.0))
    from lidarsplat import PointCloud

    cloud = PointCloud(
        np.zeros((10, 3), np.float32), np.zeros((10, 3), np.uint8)
    )
    grid = build_grid(cloud, 1.0)
    gt = rng.random((cam.height, cam.width, 3)).astype(np.float32)
    pair = make_filtered_pair(cloud, grid, gt, cam, FilterParams(levels_n=2), RP)
    assert pair.input.alpha.sum() == 0
    assert (pair.input.rgb == 0).all()
    assert np.array_equal(pair.target, gt)


def test_pair_dimension_mismatch(scene):
    cloud, grid, cam, gt, _ = scene
    with pytest.raises(DatasetError, match="does not match camera"):
        make_filtered_pair(cloud, grid, gt[:-1], cam, FP, RP)


# --- dataset generation ---------------------------------------------------------

def _scene_frames(cam, gt, n=3):
    rots = np.eye(4)
    frames = []
    for i in range(n):
        frames.append((f"f{i}", cam, np.clip(gt + 0.02 * i, 0, 1).astype(np.float32)))
    return frames


def test_generate_dataset_three_frames(tmp_path, scene):
    cloud, grid, cam, gt, _ = scene
    manifest = generate_dataset(
        cloud, _scene_frames(cam, gt), tmp_path / "ds", "filtered",
        AugmentParams(seed=5), FP, RP,
    )
    assert manifest.ids == ("f0", "f1", "f2")
    loaded = load_manifest(tmp_path / "ds")
    assert loaded == manifest
    for pid in manifest.ids:
        paths = pair_paths(tmp_path / "ds", pid)
        frame = read_frame(paths["input"])
        frame.validate()
        assert Path(paths["target"]).exists()


def test_generate_dataset_deterministic(tmp_path, scene):
    cloud, grid, cam, gt, _ = scene
    frames = _scene_frames(cam, gt)
    for name in ("one", "two"):
        generate_dataset(
            cloud, frames, tmp_path / name, "leaky", AugmentParams(seed=9), FP, RP
        )
    files_a = sorted((tmp_path / "one").rglob("*"))
    files_b = sorted((tmp_path / "two").rglob("*"))
    assert [f.name for f in files_a] == [f.name for f in files_b]
    for fa, fb in zip(files_a, files_b):
        if fa.is_file():
            assert fa.read_bytes() == fb.read_bytes(), fa.name


def test_filtered_subset_of_leaky(tmp_path, scene):
    cloud, grid, cam, gt, _ = scene
    frames = _scene_frames(cam, gt)
    generate_dataset(cloud, frames, tmp_path / "f", "filtered", AugmentParams(), FP, RP)
    generate_dataset(cloud, frames, tmp_path / "l", "leaky", AugmentParams(), FP, RP)
    for pid in ("f0", "f1", "f2"):
        fa = read_frame(pair_paths(tmp_path / "f", pid)["input"])
        la = read_frame(pair_paths(tmp_path / "l", pid)["input"])
        a, b = fa.alpha.astype(bool), la.alpha.astype(bool)
        assert not (a & ~b).any()
        assert a.sum() < b.sum()  # strictly fewer filled pixels on this scene


def test_generate_dataset_validates(tmp_path, scene):
    cloud, grid, cam, gt, _ = scene
    with pytest.raises(DatasetError, match="unknown mode"):
        generate_dataset(cloud, _scene_frames(cam, gt), tmp_path / "x", "wat",
                         AugmentParams(), FP, RP)
    with pytest.raises(DatasetError, match="no frames"):
        generate_dataset(cloud, [], tmp_path / "x", "filtered",
                         AugmentParams(), FP, RP)


def test_manifest_schema(tmp_path, scene):
    import jsonschema

    cloud, grid, cam, gt, _ = scene
    generate_dataset(
        cloud, _scene_frames(cam, gt), tmp_path / "ds", "filtered",
        AugmentParams(seed=5), FP, RP,
    )
    schema = json.loads(
        (Path(__file__).parent.parent / "src/lidarsplat/schemas/dataset_manifest.schema.json").read_text()
    )
    doc = json.loads((tmp_path / "ds/manifest.json").read_text())
    jsonschema.validate(doc, schema)
