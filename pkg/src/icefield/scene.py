"""Scene assembly: terrain + rocks + materials + lights + stereo rig.

`assemble_scene` validates instance ids, bakes all meshes into one
leaf-ordered triangle soup with per-triangle attributes, and builds the BVH,
so the scene is immutable and cheap to share across renders.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._kernels import TraceGeometry
from .bvh import build_bvh
from .camera import StereoRig
from .lighting import AmbientLight, PlanetLight, SunLight
from .material import Material
from .terrain import HeightField, RockInstance, TriangleMesh, heightfield_to_mesh

SEM_SKY = 0
SEM_TERRAIN = 1
SEM_ROCK = 2

TERRAIN_INSTANCE_ID = 0


@dataclass
class SceneAttributes:
    """Per-triangle attribute arrays in BVH leaf order."""

    n0: np.ndarray  # (T, 3) vertex normals per corner
    n1: np.ndarray
    n2: np.ndarray
    instance_id: np.ndarray  # (T,) int32
    semantic: np.ndarray  # (T,) uint8
    material_id: np.ndarray  # (T,) int32


@dataclass
class Scene:
    terrain_mesh: TriangleMesh
    rock_instances: list[RockInstance]
    materials: dict[int, Material]
    terrain_material_id: int
    sun: SunLight
    planet: Optional[PlanetLight]
    ambient: AmbientLight
    rig: StereoRig
    geometry: Optional[TraceGeometry] = field(default=None, repr=False)
    attributes: Optional[SceneAttributes] = field(default=None, repr=False)

    @property
    def assembled(self) -> bool:
        return self.geometry is not None

    @property
    def instance_ids(self) -> list[int]:
        return [r.instance_id for r in self.rock_instances]


def assemble_scene(
    terrain: HeightField | TriangleMesh,
    rocks: Optional[list[RockInstance]] = None,
    materials: Optional[dict[int, Material]] = None,
    terrain_material_id: int = 0,
    sun: Optional[SunLight] = None,
    planet: Optional[PlanetLight] = None,
    ambient: Optional[AmbientLight] = None,
    rig: Optional[StereoRig] = None,
) -> Scene:
    rocks = rocks or []
    sun = sun or SunLight()
    rig = rig or StereoRig()
    if ambient is None:
        ambient = AmbientLight.from_sun(sun.irradiance)
    if materials is None:
        materials = {terrain_material_id: Material()}
    if terrain_material_id not in materials:
        raise ValueError(f"terrain material id {terrain_material_id} not in materials")

    ids = [r.instance_id for r in rocks]
    if ids and (len(set(ids)) != len(ids) or min(ids) != 1 or max(ids) != len(ids)):
        raise ValueError("rock instance ids must be unique and contiguous from 1")
    if ids and max(ids) > 65535:
        raise ValueError("instance ids beyond 65535 cannot round-trip 16-bit masks")

    terrain_mesh = terrain if isinstance(terrain, TriangleMesh) else heightfield_to_mesh(terrain)

    meshes = [(terrain_mesh, TERRAIN_INSTANCE_ID, SEM_TERRAIN, terrain_material_id)]
    for r in rocks:
        mid = r.material_id if r.material_id is not None else terrain_material_id
        if mid not in materials:
            raise ValueError(f"rock material id {mid} not in materials")
        meshes.append((r.mesh, r.instance_id, SEM_ROCK, mid))

    v0s, e1s, e2s, n0s, n1s, n2s, insts, sems, mats = [], [], [], [], [], [], [], [], []
    for mesh, inst, sem, mid in meshes:
        f = mesh.faces
        p0 = mesh.positions[f[:, 0]]
        v0s.append(p0)
        e1s.append(mesh.positions[f[:, 1]] - p0)
        e2s.append(mesh.positions[f[:, 2]] - p0)
        n0s.append(mesh.normals[f[:, 0]])
        n1s.append(mesh.normals[f[:, 1]])
        n2s.append(mesh.normals[f[:, 2]])
        m = len(f)
        insts.append(np.full(m, inst, dtype=np.int32))
        sems.append(np.full(m, sem, dtype=np.uint8))
        mats.append(np.full(m, mid, dtype=np.int32))

    v0 = np.concatenate(v0s)
    e1 = np.concatenate(e1s)
    e2 = np.concatenate(e2s)
    flat = build_bvh(v0, v0 + e1, v0 + e2)
    order = flat.order

    geometry = TraceGeometry(
        bounds_min=flat.bounds_min,
        bounds_max=flat.bounds_max,
        miss_next=flat.miss_next,
        tri_start=flat.tri_start,
        tri_count=flat.tri_count,
        v0=np.ascontiguousarray(v0[order]),
        e1=np.ascontiguousarray(e1[order]),
        e2=np.ascontiguousarray(e2[order]),
    )
    attributes = SceneAttributes(
        n0=np.concatenate(n0s)[order],
        n1=np.concatenate(n1s)[order],
        n2=np.concatenate(n2s)[order],
        instance_id=np.concatenate(insts)[order],
        semantic=np.concatenate(sems)[order],
        material_id=np.concatenate(mats)[order],
    )
    return Scene(
        terrain_mesh=terrain_mesh,
        rock_instances=rocks,
        materials=dict(materials),
        terrain_material_id=terrain_material_id,
        sun=sun,
        planet=planet,
        ambient=ambient,
        rig=rig,
        geometry=geometry,
        attributes=attributes,
    )
