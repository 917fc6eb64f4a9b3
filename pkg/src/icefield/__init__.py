"""icefield: procedural icy-terrain scenes, ray-traced stereo rendering with
ground-truth depth and masks, classical stereo depth estimation, and the
four-metric depth evaluation suite."""

from ._kernels import BACKEND, HAVE_NATIVE, get_backend
from .camera import CameraIntrinsics, CameraPose, StereoRig, look_at
from .lighting import (
    AmbientLight,
    PlanetLight,
    SunLight,
    apparent_size,
    sample_sun_cone,
    sun_direction,
)
from .material import ImageTexture, Material, sample_albedo, shade
from .metrics import MetricsReport, dod, evaluate, l1_error, l1_rate, si_rmse
from .noise import NoiseSpec, eval_basis, eval_fbm, midpoint_displace
from .render import RenderOutput, RenderSettings, render, render_stereo, tonemap
from .scene import Scene, assemble_scene
from .stereo import (
    BlockMatchParams,
    DisparityMap,
    PyramidParams,
    block_match,
    disparity_to_depth,
    pyramid_match,
    to_grayscale,
)
from .terrain import (
    HeightField,
    RockSpec,
    TriangleMesh,
    generate_terrain,
    heightfield_to_mesh,
    load_obj,
    save_obj,
    scatter_rocks,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAVE_NATIVE",
    "get_backend",
    "CameraIntrinsics",
    "CameraPose",
    "StereoRig",
    "look_at",
    "AmbientLight",
    "PlanetLight",
    "SunLight",
    "apparent_size",
    "sample_sun_cone",
    "sun_direction",
    "ImageTexture",
    "Material",
    "sample_albedo",
    "shade",
    "MetricsReport",
    "dod",
    "evaluate",
    "l1_error",
    "l1_rate",
    "si_rmse",
    "NoiseSpec",
    "eval_basis",
    "eval_fbm",
    "midpoint_displace",
    "RenderOutput",
    "RenderSettings",
    "render",
    "render_stereo",
    "tonemap",
    "Scene",
    "assemble_scene",
    "BlockMatchParams",
    "DisparityMap",
    "PyramidParams",
    "block_match",
    "disparity_to_depth",
    "pyramid_match",
    "to_grayscale",
    "HeightField",
    "RockSpec",
    "TriangleMesh",
    "generate_terrain",
    "heightfield_to_mesh",
    "load_obj",
    "save_obj",
    "scatter_rocks",
    "__version__",
]
