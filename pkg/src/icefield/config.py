"""Dataset configuration: a versioned TOML file drives scene generation.

Photometric and lighting keys may be scalars or lists; lists are sweep axes
expanded as a cartesian product (capped by `sweep_cap`). Each generated scene
gets a manifest in the same dialect recording every resolved parameter and
seed, so a scene can be regenerated bit-exactly from its manifest alone.
"""

from __future__ import annotations

import hashlib
import math
import sys
from functools import lru_cache
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .camera import CameraIntrinsics, StereoRig, look_at
from .lighting import (
    IRRADIANCE_EUROPA,
    SUN_ANGULAR_DIAMETER,
    AmbientLight,
    PlanetLight,
    SunLight,
    sun_direction,
)
from .material import Material
from .noise import NoiseSpec
from .render import RenderSettings
from .rng import hash_u64
from .scene import Scene, assemble_scene
from .terrain import TERRAIN_KINDS, RockSpec, generate_terrain, scatter_rocks

CONFIG_VERSION = 1

# axes swept as a cartesian product, in this order
SWEEP_AXES = (
    ("material", "albedo"),
    ("material", "specular"),
    ("material", "subsurface"),
    ("material", "transmission"),
    ("material", "texture_noise"),
    ("lighting", "irradiance"),
    ("lighting", "elevation"),
    ("lighting", "azimuth"),
)

DEFAULTS: dict[str, Any] = {
    "version": CONFIG_VERSION,
    "sweep_cap": 10_000,
    "terrain": {
        "kind": "rugged_low",
        "extent": 20.0,
        "resolution": 129,
        "seed": 7,
    },
    "rocks": {
        "density": 0.0,
        "scale_min": 0.1,
        "scale_max": 1.0,
        "shape_irregularity": 0.4,
        "orientation": "random_yaw",
        "seed": 11,
    },
    "material": {
        "albedo": 0.8,
        "specular": 0.1,
        "subsurface": 0.0,
        "transmission": 0.0,
        "roughness": 0.7,
        "texture_noise": 0.25,
        "texture_basis": "perlin",
        "texture_octaves": 4,
        "texture_frequency": 1.3,
        "texture_seed": 3,
    },
    "lighting": {
        "irradiance": IRRADIANCE_EUROPA,
        "angular_diameter": SUN_ANGULAR_DIAMETER,
        "elevation": 35.0,
        "azimuth": 0.0,
        "ambient_scale": 0.01,
        "planet_enabled": False,
        "planet_diameter": 120536.0,
        "planet_distance": 238000.0,
        "planet_elevation": 20.0,
        "planet_azimuth": 180.0,
        "planet_radiance_scale": 0.3,
    },
    "rig": {
        "baseline": 0.25,
        "sensor_width": 60.0,
        "focal_length": 32.0,
        "image_width": 640,
        "image_height": 480,
        "x": None,  # default: terrain center
        "y": None,  # default: 15% across
        "height": 4.0,  # above the local surface
        "pitch": 40.0,  # degrees below horizontal
        "yaw": 90.0,  # view azimuth
    },
    "render": {
        "shadow_samples": 16,
        "exposure": 1.0,
        "srgb": True,
        "seed": 99,
    },
    "output": {
        "directory": "dataset",
        "write_depth_png16": False,
    },
}

_RANGE_CHECKS = {
    ("material", "albedo"): (0.0, 1.0),
    ("material", "specular"): (0.0, 1.0),
    ("material", "subsurface"): (0.0, 1.0),
    ("material", "transmission"): (0.0, 1.0),
    ("material", "roughness"): (0.0, 1.0),
    ("lighting", "elevation"): (0.0, 90.0),
    ("lighting", "azimuth"): (0.0, 360.0),
}


class ConfigError(ValueError):
    pass


def _merge(defaults: dict, user: dict, path: str = "") -> dict:
    out = {}
    for key, dval in defaults.items():
        if isinstance(dval, dict):
            sub = user.get(key, {})
            if not isinstance(sub, dict):
                raise ConfigError(f"{path}{key}: expected a table")
            out[key] = _merge(dval, sub, f"{path}{key}.")
        else:
            out[key] = user.get(key, dval)
    for key in user:
        if key not in defaults:
            raise ConfigError(f"unknown config key: {path}{key}")
    return out


def parse_config_text(text: str) -> dict:
    try:
        user = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config is not valid TOML: {e}") from e
    cfg = _merge(DEFAULTS, user)
    if cfg["version"] != CONFIG_VERSION:
        raise ConfigError(f"version: expected {CONFIG_VERSION}, got {cfg['version']}")
    _validate(cfg)
    return cfg


def parse_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return parse_config_text(f.read())


def _validate(cfg: dict) -> None:
    if cfg["terrain"]["kind"] not in TERRAIN_KINDS:
        raise ConfigError(f"terrain.kind: unknown kind {cfg['terrain']['kind']!r}")
    if cfg["terrain"]["resolution"] < 2:
        raise ConfigError("terrain.resolution: must be >= 2")
    if not cfg["terrain"]["extent"] > 0:
        raise ConfigError("terrain.extent: must be > 0")
    if cfg["material"]["texture_basis"] not in ("perlin", "worley_f1", "turbulence"):
        raise ConfigError(
            f"material.texture_basis: {cfg['material']['texture_basis']!r} is not "
            "a point-evaluable basis"
        )
    r = cfg["rocks"]
    if r["density"] < 0:
        raise ConfigError("rocks.density: must be >= 0")
    if not 0 < r["scale_min"] <= r["scale_max"]:
        raise ConfigError("rocks.scale_min/scale_max: need 0 < min <= max")
    if r["orientation"] not in ("random_yaw", "aligned"):
        raise ConfigError(f"rocks.orientation: unknown mode {r['orientation']!r}")
    for (sec, key), (lo, hi) in _RANGE_CHECKS.items():
        vals = cfg[sec][key]
        vals = vals if isinstance(vals, list) else [vals]
        for i, v in enumerate(vals):
            if not lo <= float(v) <= hi:
                where = f"{sec}.{key}[{i}]" if isinstance(cfg[sec][key], list) else f"{sec}.{key}"
                raise ConfigError(f"{where}: {v} outside [{lo}, {hi}]")
    irr = cfg["lighting"]["irradiance"]
    for v in irr if isinstance(irr, list) else [irr]:
        if v < 0:
            raise ConfigError("lighting.irradiance: must be >= 0")
    rd = cfg["render"]
    if rd["shadow_samples"] < 1:
        raise ConfigError("render.shadow_samples: must be >= 1")
    if not rd["exposure"] > 0:
        raise ConfigError("render.exposure: must be > 0")
    n_scenes = 1
    for sec, key in SWEEP_AXES:
        v = cfg[sec][key]
        n_scenes *= len(v) if isinstance(v, list) else 1
    if n_scenes > cfg["sweep_cap"]:
        raise ConfigError(
            f"sweep expands to {n_scenes} scenes, above sweep_cap {cfg['sweep_cap']}"
        )


def apply_seed_override(cfg: dict, override: int) -> dict:
    """Rederive every seed from the override (documented --seed-override rule)."""
    cfg = {k: (dict(v) if isinstance(v, dict) else v) for k, v in cfg.items()}
    cfg["terrain"]["seed"] = hash_u64(override, 1) % 2**31
    cfg["rocks"]["seed"] = hash_u64(override, 2) % 2**31
    cfg["material"]["texture_seed"] = hash_u64(override, 3) % 2**31
    cfg["render"]["seed"] = hash_u64(override, 4) % 2**31
    return cfg


def expand_sweep(cfg: dict) -> list[dict]:
    """Cartesian expansion of list-valued sweep axes into per-scene manifests."""
    combos = [dict()]
    for sec, key in SWEEP_AXES:
        v = cfg[sec][key]
        vals = v if isinstance(v, list) else [v]
        combos = [dict(c, **{f"{sec}.{key}": val}) for c in combos for val in vals]

    manifests = []
    for idx, combo in enumerate(combos):
        m = {k: (dict(v) if isinstance(v, dict) else v) for k, v in cfg.items()}
        # output policy and the cap do not affect pixels; manifests omit them
        del m["sweep_cap"]
        del m["output"]
        for flat_key, val in combo.items():
            sec, key = flat_key.split(".")
            m[sec][key] = val
        m["scene_index"] = idx
        m["scene_name"] = scene_name(idx, m)
        manifests.append(m)
    return manifests


def manifest_hash(manifest: dict) -> str:
    basis = {k: v for k, v in manifest.items() if k not in ("scene_index", "scene_name")}
    return hashlib.sha1(dump_toml(basis).encode("utf-8")).hexdigest()[:8]


def scene_name(idx: int, manifest: dict) -> str:
    return f"{idx:04d}_{manifest_hash(manifest)}"


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize value of type {type(v).__name__}")


def dump_toml(d: dict) -> str:
    """Deterministic TOML for configs/manifests (sorted keys, scalars first)."""
    lines = []
    for key in sorted(k for k, v in d.items() if not isinstance(v, dict)):
        if d[key] is not None:
            lines.append(f"{key} = {_toml_value(d[key])}")
    for sec in sorted(k for k, v in d.items() if isinstance(v, dict)):
        lines.append("")
        lines.append(f"[{sec}]")
        for key in sorted(d[sec]):
            if d[sec][key] is not None:
                lines.append(f"{key} = {_toml_value(d[sec][key])}")
    return "\n".join(lines) + "\n"


def load_manifest(path) -> dict:
    with open(path, "rb") as f:
        return tomllib.load(f)


def material_from_manifest(m: dict) -> Material:
    mat = m["material"]
    amp = float(mat["texture_noise"])
    tex = None
    if amp > 0:
        tex = NoiseSpec(
            basis=mat["texture_basis"],
            seed=int(mat["texture_seed"]),
            octaves=int(mat["texture_octaves"]),
            lacunarity=2.0,
            gain=0.5,
            base_frequency=float(mat["texture_frequency"]),
            amplitude=amp,
        )
    a = float(mat["albedo"])
    return Material(
        albedo=(a, a, a),
        roughness=float(mat["roughness"]),
        specular=float(mat["specular"]),
        subsurface=float(mat["subsurface"]),
        transmission=float(mat["transmission"]),
        texture_noise=tex,
    )


@lru_cache(maxsize=4)
def _scene_core(terrain_items: tuple, rocks_items: tuple):
    """Geometry shared by every sweep point of one terrain/rocks setting:
    photometric axes do not touch the mesh or the BVH, so sweeps reuse it.
    Returns (heightfield, assembled scene with default appearance)."""
    t = dict(terrain_items)
    r = dict(rocks_items)
    hf = generate_terrain(t["kind"], float(t["extent"]), int(t["resolution"]), int(t["seed"]))
    rock_spec = RockSpec(
        density=float(r["density"]),
        scale_min=float(r["scale_min"]),
        scale_max=float(r["scale_max"]),
        shape_irregularity=float(r["shape_irregularity"]),
        orientation=r["orientation"],
        seed=int(r["seed"]),
    )
    return hf, assemble_scene(hf, rocks=scatter_rocks(hf, rock_spec))


def scene_from_manifest(m: dict) -> tuple[Scene, RenderSettings]:
    """Rebuild the full renderable scene a manifest describes."""
    hf, core = _scene_core(tuple(sorted(m["terrain"].items())),
                           tuple(sorted(m["rocks"].items())))

    li = m["lighting"]
    sun = SunLight(
        irradiance=float(li["irradiance"]),
        angular_diameter=float(li["angular_diameter"]),
        elevation=float(li["elevation"]),
        azimuth=float(li["azimuth"]),
    )
    planet = None
    if li["planet_enabled"]:
        planet = PlanetLight(
            body_diameter=float(li["planet_diameter"]),
            distance=float(li["planet_distance"]),
            direction=tuple(sun_direction(float(li["planet_elevation"]),
                                          float(li["planet_azimuth"]))),
            disc_radiance_scale=float(li["planet_radiance_scale"]),
        )
    ambient = AmbientLight.from_sun(sun.irradiance, float(li["ambient_scale"]))

    scene = Scene(
        terrain_mesh=core.terrain_mesh,
        rock_instances=core.rock_instances,
        materials={0: material_from_manifest(m)},
        terrain_material_id=0,
        sun=sun,
        planet=planet,
        ambient=ambient,
        rig=rig_from_manifest(m, hf),
        geometry=core.geometry,
        attributes=core.attributes,
    )
    rd = m["render"]
    settings = RenderSettings(
        shadow_samples=int(rd["shadow_samples"]),
        exposure=float(rd["exposure"]),
        srgb=bool(rd["srgb"]),
        seed=int(rd["seed"]),
    )
    return scene, settings


def rig_from_manifest(m: dict, hf) -> StereoRig:
    rg = m["rig"]
    ex, ey = hf.extent
    x = float(rg["x"]) if rg.get("x") is not None else ex / 2.0
    y = float(rg["y"]) if rg.get("y") is not None else ey * 0.15
    pitch = float(rg["pitch"])
    yaw = float(rg["yaw"])
    pos = [x, y, hf.sample(x, y) + float(rg["height"])]
    # forward: yaw in the plane, pitched down
    p = math.radians(pitch)
    a = math.radians(yaw)
    forward = [math.cos(p) * math.cos(a), math.cos(p) * math.sin(a), -math.sin(p)]
    target = [pos[0] + forward[0], pos[1] + forward[1], pos[2] + forward[2]]
    pose = look_at(pos, target)
    intr = CameraIntrinsics(
        sensor_width=float(rg["sensor_width"]),
        focal_length=float(rg["focal_length"]),
        image_width=int(rg["image_width"]),
        image_height=int(rg["image_height"]),
    )
    return StereoRig(intrinsics=intr, baseline=float(rg["baseline"]), pose=pose)
