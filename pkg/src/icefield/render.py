"""Ray-traced stereo rendering with ground-truth depth and masks.

Direct lighting with soft sun shadows (visibility averaged over cone samples
of the sun's angular diameter), an optional planetary-disc light, and a
uniform ambient term. Depth is planar z-distance along the optical axis (the
quantity the stereo relation d = f*B/Z expects), 0 where the ray escapes to
the sky. Per-pixel sampling is seeded by (seed, eye, pixel index, sample), so
output is deterministic and independent of how rows are chunked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import kernels as default_kernels
from .camera import primary_rays
from .imgio import srgb_decode, srgb_encode  # noqa: F401  (re-exported)
from .lighting import cone_directions
from .material import sample_albedo, shade
from .rng import hash_u64, hash_unit_vec
from .scene import SEM_ROCK, SEM_SKY, Scene

SHADOW_EPS = 1e-3  # m, shadow-ray origin offset along the sampled direction
SHADOW_T_MAX = 1e30  # "infinite" range for distant lights

_EYE_INDEX = {"left": 0, "right": 1}


@dataclass(frozen=True)
class RenderSettings:
    shadow_samples: int = 16
    exposure: float = 1.0
    srgb: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.shadow_samples < 1:
            raise ValueError("shadow_samples must be >= 1")
        if not self.exposure > 0:
            raise ValueError("exposure must be > 0")


@dataclass
class RenderOutput:
    rgb: np.ndarray  # (H, W, 3) uint8, tonemapped
    depth: np.ndarray  # (H, W) float32 meters, 0 = sky
    semantic: np.ndarray  # (H, W) uint16: 0 sky, 1 terrain, 2 rock
    instance: np.ndarray  # (H, W) uint16: rock instance id, 0 = non-rock
    linear: np.ndarray  # (H, W, 3) float64 pre-tonemap radiance
    stats: dict = field(default_factory=dict)


def tonemap(linear: np.ndarray, exposure: float, srgb: bool = True):
    """Scale by exposure, clip to [0,1], sRGB-encode, quantize to 8 bits.
    Returns (uint8 image, clipped pixel count): a pixel counts as clipped if
    any channel exceeded 1 before the clamp."""
    if not exposure > 0:
        raise ValueError("exposure must be > 0")
    scaled = np.asarray(linear, dtype=np.float64) * exposure
    clipped = int(np.count_nonzero(np.any(scaled > 1.0, axis=-1)))
    display = np.clip(scaled, 0.0, 1.0)
    if srgb:
        display = srgb_encode(display)
    return np.rint(display * 255.0).astype(np.uint8), clipped


def _shadow_visibility(geom, kern, points, hit_tri, axis, half_angle,
                       samples, seed, pix_index):
    """Fraction of cone samples that reach the light, per hit point. Sampling
    is a pure function of (seed, pixel index, sample index)."""
    acc = np.zeros(len(points))
    for s in range(samples):
        u1 = hash_unit_vec(seed, pix_index, s, 0)
        u2 = hash_unit_vec(seed, pix_index, s, 1)
        d = cone_directions(axis, half_angle, u1, u2)
        o = points + SHADOW_EPS * d
        occ = kern.trace_any(geom, o, d, SHADOW_T_MAX, hit_tri)
        acc += 1.0 - occ
    return acc / samples


def render(scene: Scene, eye: str, settings: RenderSettings,
           kern=None, row_block: int = 64) -> RenderOutput:
    """Render one eye of the stereo rig: RGB + depth + semantic/instance masks."""
    if not scene.assembled:
        raise ValueError("scene is not assembled; use assemble_scene()")
    kern = kern or default_kernels
    eye_i = _EYE_INDEX[eye]  # KeyError -> invalid eye
    intr = scene.rig.intrinsics
    pose = scene.rig.eye_pose(eye)
    w, h = intr.image_width, intr.image_height
    geom = scene.geometry
    attr = scene.attributes

    depth = np.zeros((h, w), dtype=np.float32)
    semantic = np.zeros((h, w), dtype=np.uint16)
    instance = np.zeros((h, w), dtype=np.uint16)
    linear = np.zeros((h, w, 3), dtype=np.float64)

    sun = scene.sun
    sun_axis = sun.direction
    sun_irr = sun.irradiance * np.asarray(sun.color, dtype=np.float64)
    planet = scene.planet if (scene.planet is not None and scene.planet.enabled) else None
    if planet is not None:
        planet_axis = np.asarray(planet.direction)
        planet_irr = planet.irradiance_normal(sun.irradiance) * np.ones(3)
        planet_half = np.radians(planet.apparent_size_deg) / 2.0
    ambient = np.asarray(scene.ambient.radiance, dtype=np.float64)

    sun_seed = hash_u64(settings.seed, eye_i, 0)
    planet_seed = hash_u64(settings.seed, eye_i, 1)

    for y0 in range(0, h, row_block):
        y1 = min(y0 + row_block, h)
        o, d = primary_rays(intr, pose, rows=(y0, y1))
        t, tri, bu, bv = kern.trace_rays(geom, o, d)
        hit = tri >= 0
        n_px = len(d)
        pix_index = np.arange(y0 * w, y1 * w)

        z = np.zeros(n_px)
        z[hit] = t[hit] * (d[hit] @ pose.forward)
        sem = np.where(hit, attr.semantic[tri], SEM_SKY).astype(np.uint16)
        inst = np.zeros(n_px, dtype=np.uint16)
        rock = hit & (sem == SEM_ROCK)
        inst[rock] = attr.instance_id[tri[rock]]

        rad = np.zeros((n_px, 3))
        if hit.any():
            hidx = np.flatnonzero(hit)
            htri = tri[hidx]
            p = o[hidx] + t[hidx, None] * d[hidx]
            u = bu[hidx, None]
            v = bv[hidx, None]
            n = (1.0 - u - v) * attr.n0[htri] + u * attr.n1[htri] + v * attr.n2[htri]
            # opposite corner normals can cancel on knife edges
            n /= np.maximum(np.linalg.norm(n, axis=1, keepdims=True), 1e-30)
            wo = -d[hidx]
            # face the viewer (rock interiors, grazing hits)
            flip = np.sum(n * wo, axis=1) < 0.0
            n[flip] = -n[flip]

            sun_vis = _shadow_visibility(
                geom, kern, p, htri, sun_axis, sun.angular_diameter / 2.0,
                settings.shadow_samples, sun_seed, pix_index[hidx],
            )
            if planet is not None:
                planet_vis = _shadow_visibility(
                    geom, kern, p, htri, planet_axis, planet_half,
                    settings.shadow_samples, planet_seed, pix_index[hidx],
                )

            hrad = np.zeros((len(hidx), 3))
            mat_ids = attr.material_id[htri]
            for mid in np.unique(mat_ids):
                m = scene.materials[int(mid)]
                sel = mat_ids == mid
                alb = sample_albedo(m, p[sel])
                f_sun = shade(m, n[sel], sun_axis, wo[sel], alb)
                hrad[sel] += sun_vis[sel, None] * f_sun * sun_irr
                if planet is not None:
                    f_pl = shade(m, n[sel], planet_axis, wo[sel], alb)
                    hrad[sel] += planet_vis[sel, None] * f_pl * planet_irr
                hrad[sel] += alb * (1.0 - m.transmission) * ambient
            rad[hidx] = hrad

        depth[y0:y1] = z.reshape(y1 - y0, w).astype(np.float32)
        semantic[y0:y1] = sem.reshape(y1 - y0, w)
        instance[y0:y1] = inst.reshape(y1 - y0, w)
        linear[y0:y1] = rad.reshape(y1 - y0, w, 3)

    rgb, clipped = tonemap(linear, settings.exposure, settings.srgb)
    stats = {
        "clipped_pixels": clipped,
        "clipped_fraction": clipped / (w * h),
        "backend": kern.name,
    }
    return RenderOutput(rgb=rgb, depth=depth, semantic=semantic,
                        instance=instance, linear=linear, stats=stats)


def render_stereo(scene: Scene, settings: RenderSettings, kern=None,
                  row_block: int = 64):
    """Render both eyes; the right camera sits +baseline along camera x."""
    left = render(scene, "left", settings, kern=kern, row_block=row_block)
    right = render(scene, "right", settings, kern=kern, row_block=row_block)
    return left, right


def validate_output(out: RenderOutput) -> None:
    """Assert the per-pixel mask/depth consistency contract."""
    sky = out.semantic == SEM_SKY
    if not np.all(out.depth[sky] == 0.0):
        raise AssertionError("sky pixels must have depth == 0")
    if not np.all(out.depth[~sky] > 0.0):
        raise AssertionError("non-sky pixels must have depth > 0")
    rock = out.semantic == SEM_ROCK
    if not np.all(out.instance[~rock] == 0):
        raise AssertionError("instance ids must be 0 off rocks")
    if not np.all(out.instance[rock] > 0):
        raise AssertionError("rock pixels must carry instance ids")
