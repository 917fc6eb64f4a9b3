"""Shared scene builders for the test suite."""

import numpy as np

from icefield.camera import CameraIntrinsics, CameraPose, StereoRig
from icefield.lighting import AmbientLight, SunLight
from icefield.material import Material
from icefield.noise import NoiseSpec
from icefield.scene import assemble_scene
from icefield.terrain import HeightField, RockSpec, generate_terrain, scatter_rocks


def top_down_pose(x, y, height):
    """Camera looking straight down; image x along +x, baseline along +x."""
    return CameraPose(
        position=np.array([x, y, height], dtype=float),
        right=np.array([1.0, 0.0, 0.0]),
        up=np.array([0.0, 1.0, 0.0]),
        forward=np.array([0.0, 0.0, -1.0]),
    )


def small_intrinsics(w=64, h=48):
    return CameraIntrinsics(sensor_width=60.0, focal_length=32.0,
                            image_width=w, image_height=h)


def flat_plane_scene(z0, extent=20.0, img=(64, 48), material=None, sun=None,
                     ambient=None, baseline=0.25, texture_amp=0.0, n_grid=2):
    """Flat terrain at z=0, camera z0 above the center looking straight down:
    every pixel sees planar depth exactly z0."""
    n = n_grid + 1
    hf = HeightField(width=n, height=n, cell_size=extent / (n - 1),
                     elevations=np.zeros((n, n)))
    if material is None:
        tex = None
        if texture_amp > 0:
            tex = NoiseSpec(basis="perlin", seed=12, octaves=4,
                            base_frequency=1.1, amplitude=texture_amp)
        material = Material(albedo=(0.8, 0.8, 0.8), specular=0.0,
                            texture_noise=tex)
    rig = StereoRig(
        intrinsics=small_intrinsics(*img),
        baseline=baseline,
        pose=top_down_pose(extent / 2.0, extent / 2.0, z0),
    )
    return assemble_scene(
        hf,
        materials={0: material},
        sun=sun or SunLight(elevation=35.0),
        ambient=ambient if ambient is not None else AmbientLight(),
        rig=rig,
    )


def rocky_scene(seed, img=(64, 48), density=0.08, kind="rugged_low", extent=20.0):
    hf = generate_terrain(kind, extent, 33, seed=seed)
    rocks = scatter_rocks(hf, RockSpec(density=density, scale_min=0.3,
                                       scale_max=1.2, seed=seed + 1))
    rig = StereoRig(
        intrinsics=small_intrinsics(*img),
        baseline=0.25,
        pose=top_down_pose(extent / 2.0, extent / 2.0, hf.elevations.max() + 6.0),
    )
    return assemble_scene(
        hf,
        rocks=rocks,
        materials={0: Material(albedo=(0.8, 0.8, 0.85), specular=0.05)},
        sun=SunLight(elevation=35.0, azimuth=30.0),
        rig=rig,
    )
