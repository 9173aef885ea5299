"""lidarsplat: real-time colored LiDAR point cloud rendering.

Pipeline: uniform-grid frustum culling -> 1x1 point projection with a
deterministic soft z-buffer -> hierarchical depth-guided background filter.
Plus synthetic training-pair generation and a bridge to an external neural
reconstruction service.
"""

from ._kernels import available_backends, default_backend_name, get_backend
from .bench import BenchReport, run_bench
from .cloud import PointCloud
from .filtering import (
    DepthPyramid,
    FilterParams,
    build_min_pyramid,
    depth_filter,
    filter_depth_image,
    laplacian_edges,
    upsample_filter_step,
)
from .frame import FrameRGBDA, RenderParams
from .geometry import CameraModel, Frustum, RigidTransform, extract_frustum, unproject
from .grid import UniformGrid, build_grid, cull_cells
from .metrics import psnr, ssim
from .render import project_points
from .synth import (
    AugmentParams,
    TrainingPair,
    augment_brightness_contrast,
    generate_dataset,
    make_filtered_pair,
    make_leaky_pair,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentParams",
    "BenchReport",
    "CameraModel",
    "DepthPyramid",
    "FilterParams",
    "FrameRGBDA",
    "Frustum",
    "PointCloud",
    "RenderParams",
    "RigidTransform",
    "TrainingPair",
    "UniformGrid",
    "augment_brightness_contrast",
    "available_backends",
    "build_grid",
    "build_min_pyramid",
    "cull_cells",
    "default_backend_name",
    "depth_filter",
    "extract_frustum",
    "filter_depth_image",
    "generate_dataset",
    "get_backend",
    "laplacian_edges",
    "make_filtered_pair",
    "make_leaky_pair",
    "project_points",
    "psnr",
    "run_bench",
    "ssim",
    "unproject",
    "upsample_filter_step",
    "__version__",
]
