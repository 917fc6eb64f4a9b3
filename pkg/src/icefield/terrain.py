"""Terrain heightfields, meshing, procedural presets and rock scattering."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import noise
from .noise import NoiseSpec
from .rng import hash_u64, philox

TERRAIN_KINDS = ("smooth", "rugged_low", "rugged_mid", "rugged_high", "penitente")


@dataclass
class HeightField:
    """Regular elevation grid. elevations[j, i] is the height at
    (x, y) = (i * cell_size, j * cell_size)."""

    width: int
    height: int
    cell_size: float
    elevations: np.ndarray

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ValueError("heightfield must be at least 2x2")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be > 0")
        self.elevations = np.asarray(self.elevations, dtype=np.float64)
        if self.elevations.shape != (self.height, self.width):
            raise ValueError(
                f"elevations shape {self.elevations.shape} != (height, width) "
                f"({self.height}, {self.width})"
            )
        if not np.all(np.isfinite(self.elevations)):
            raise ValueError("elevations must all be finite")

    @property
    def extent(self) -> tuple[float, float]:
        return ((self.width - 1) * self.cell_size, (self.height - 1) * self.cell_size)

    def sample(self, x, y):
        """Bilinear height at world (x, y); clamped at the borders."""
        gx = np.clip(np.asarray(x, dtype=np.float64) / self.cell_size, 0, self.width - 1)
        gy = np.clip(np.asarray(y, dtype=np.float64) / self.cell_size, 0, self.height - 1)
        i0 = np.minimum(gx.astype(np.int64), self.width - 2)
        j0 = np.minimum(gy.astype(np.int64), self.height - 2)
        fx = gx - i0
        fy = gy - j0
        z = self.elevations
        top = z[j0, i0] * (1 - fx) + z[j0, i0 + 1] * fx
        bot = z[j0 + 1, i0] * (1 - fx) + z[j0 + 1, i0 + 1] * fx
        out = top * (1 - fy) + bot * fy
        return out if out.ndim else float(out)


@dataclass
class TriangleMesh:
    positions: np.ndarray  # (N, 3) float64, meters
    normals: np.ndarray  # (N, 3) float64, unit vertex normals
    faces: np.ndarray  # (M, 3) int32
    object_coords: np.ndarray  # (N, 3) float64, texture-mapping coordinates

    @property
    def n_faces(self) -> int:
        return len(self.faces)


def _vertex_normals(positions: np.ndarray, faces: np.ndarray) -> np.ndarray:
    # area-weighted: accumulate the (unnormalized) face cross products
    p0 = positions[faces[:, 0]]
    e1 = positions[faces[:, 1]] - p0
    e2 = positions[faces[:, 2]] - p0
    fn = np.cross(e1, e2)
    normals = np.zeros_like(positions)
    for c in range(3):
        np.add.at(normals, faces[:, c], fn)
    norm = np.linalg.norm(normals, axis=1, keepdims=True)
    norm[norm == 0] = 1.0
    return normals / norm


def mesh_from_arrays(positions: np.ndarray, faces: np.ndarray) -> TriangleMesh:
    positions = np.asarray(positions, dtype=np.float64)
    faces = np.asarray(faces, dtype=np.int32)
    return TriangleMesh(
        positions=positions,
        normals=_vertex_normals(positions, faces),
        faces=faces,
        object_coords=positions.copy(),
    )


def heightfield_to_mesh(hf: HeightField) -> TriangleMesh:
    """Triangulate a heightfield: 2 triangles per cell, CCW seen from +z,
    vertex normals area-weighted, object coordinates = world positions."""
    w, h = hf.width, hf.height
    xs = np.arange(w) * hf.cell_size
    ys = np.arange(h) * hf.cell_size
    gx, gy = np.meshgrid(xs, ys)  # (h, w)
    positions = np.column_stack([gx.ravel(), gy.ravel(), hf.elevations.ravel()])

    idx = np.arange(h * w).reshape(h, w)
    v00 = idx[:-1, :-1].ravel()
    v10 = idx[:-1, 1:].ravel()
    v01 = idx[1:, :-1].ravel()
    v11 = idx[1:, 1:].ravel()
    faces = np.concatenate(
        [
            np.column_stack([v00, v10, v11]),
            np.column_stack([v00, v11, v01]),
        ]
    ).astype(np.int32)
    return mesh_from_arrays(positions, faces)


def generate_terrain(
    kind: str,
    extent: float,
    resolution: int,
    seed: int,
    penitente_height: float = 6.0,
) -> HeightField:
    """Procedural heightfield presets of increasing ruggedness.

    smooth/rugged_* are perlin fBm with growing amplitude and octave count;
    penitente is a |perlin|-sharpened ridge field rescaled so its
    peak-to-trough equals penitente_height (spike fields up to 6 m).
    """
    if kind not in TERRAIN_KINDS:
        raise ValueError(f"unknown terrain kind {kind!r}")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if not extent > 0:
        raise ValueError("extent must be > 0")
    if not 0.0 < penitente_height <= 6.0:
        raise ValueError("penitente_height must be in (0, 6] m")

    cell = extent / (resolution - 1)
    xs = np.arange(resolution) * cell
    gx, gy = np.meshgrid(xs, xs)
    pts = np.stack([gx, gy], axis=-1)

    if kind == "penitente":
        spec = NoiseSpec(
            basis="perlin", seed=seed, octaves=3, lacunarity=2.0, gain=0.5,
            base_frequency=0.7, amplitude=1.0,
        )
        ridged = 1.0 - np.abs(noise.eval_fbm(spec, pts)) / noise.fbm_bound(spec)
        z = ridged**3
        lo, hi = z.min(), z.max()
        z = (z - lo) / (hi - lo) * penitente_height
    else:
        amp_frac, octaves, freq_cycles = {
            "smooth": (0.010, 3, 1.5),
            "rugged_low": (0.020, 5, 2.0),
            "rugged_mid": (0.045, 6, 3.0),
            "rugged_high": (0.090, 7, 4.0),
        }[kind]
        spec = NoiseSpec(
            basis="perlin", seed=seed, octaves=octaves, lacunarity=2.0, gain=0.5,
            base_frequency=freq_cycles / extent, amplitude=amp_frac * extent,
        )
        z = noise.eval_fbm(spec, pts)

    return HeightField(width=resolution, height=resolution, cell_size=cell, elevations=z)


@dataclass(frozen=True)
class RockSpec:
    density: float = 0.25  # rocks per m^2
    scale_min: float = 0.1  # diameter, m
    scale_max: float = 1.0
    shape_irregularity: float = 0.4
    orientation: str = "random_yaw"  # or "aligned"
    seed: int = 0

    def __post_init__(self):
        if self.density < 0:
            raise ValueError("density must be >= 0")
        if not 0 < self.scale_min <= self.scale_max:
            raise ValueError("need 0 < scale_min <= scale_max")
        if not 0.0 <= self.shape_irregularity <= 1.0:
            raise ValueError("shape_irregularity must be in [0, 1]")
        if self.orientation not in ("random_yaw", "aligned"):
            raise ValueError("orientation must be 'random_yaw' or 'aligned'")


@dataclass
class RockInstance:
    mesh: TriangleMesh  # world-space vertices
    transform: np.ndarray  # 4x4 local->world (kept for inspection)
    instance_id: int  # >= 1; 0 is reserved for terrain
    material_id: Optional[int] = None  # None -> inherit terrain material
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    diameter: float = 0.0


# Maximum radial displacement as a fraction of the radius at irregularity 1.
ROCK_DISPLACEMENT_FRACTION = 0.35
# Fraction of the diameter buried below the local terrain surface.
ROCK_EMBED_FRACTION = 0.2


def icosphere(subdivisions: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Unit icosphere (radius 1) vertices and faces."""
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = np.array(verts[a]) + np.array(verts[b])
                m /= np.linalg.norm(m)
                cache[key] = len(verts)
                verts.append(tuple(m))
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return np.array(verts, dtype=np.float64), np.array(faces, dtype=np.int32)


_ICOSPHERE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _icosphere_cached(subdivisions: int) -> tuple[np.ndarray, np.ndarray]:
    if subdivisions not in _ICOSPHERE_CACHE:
        _ICOSPHERE_CACHE[subdivisions] = icosphere(subdivisions)
    v, f = _ICOSPHERE_CACHE[subdivisions]
    return v.copy(), f


def _rock_mesh(seed: int, irregularity: float, diameter: float) -> TriangleMesh:
    verts, faces = _icosphere_cached(1)
    if irregularity > 0:
        spec = NoiseSpec(basis="perlin", seed=seed, octaves=2, gain=0.5,
                         base_frequency=0.9, amplitude=1.0)
        # 2D noise sampled on two orthogonal slices of the unit sphere
        n1 = noise.eval_fbm(spec, verts[:, :2] + 7.3)
        n2 = noise.eval_fbm(spec, np.column_stack([verts[:, 1] - 3.1, verts[:, 2] + 5.7]))
        bump = (n1 + n2) / (2.0 * noise.fbm_bound(spec))  # in [-1, 1]
        verts = verts * (1.0 + ROCK_DISPLACEMENT_FRACTION * irregularity * bump)[:, None]
    verts *= diameter / 2.0
    return mesh_from_arrays(verts, faces)


def _rotation_z(yaw: float) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _align_z_to(n: np.ndarray) -> np.ndarray:
    """Rotation taking +z to unit vector n."""
    z = np.array([0.0, 0.0, 1.0])
    v = np.cross(z, n)
    c = float(np.dot(z, n))
    if np.linalg.norm(v) < 1e-12:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + vx + vx @ vx / (1.0 + c)


def _surface_normal(hf: HeightField, x: float, y: float) -> np.ndarray:
    d = hf.cell_size
    dzdx = (hf.sample(x + d, y) - hf.sample(x - d, y)) / (2 * d)
    dzdy = (hf.sample(x, y + d) - hf.sample(x, y - d)) / (2 * d)
    n = np.array([-dzdx, -dzdy, 1.0])
    return n / np.linalg.norm(n)


def scatter_rocks(
    hf: HeightField,
    spec: RockSpec,
    material_id: Optional[int] = None,
) -> list[RockInstance]:
    """Poisson-scatter noise-displaced icospheres over the heightfield.

    Count ~ Poisson(density * area); diameters are log-uniform in
    [scale_min, scale_max]; each rock sits on the surface with 20% of its
    diameter buried. Instance ids run 1..count.
    """
    ex, ey = hf.extent
    area = ex * ey
    lam = spec.density * area
    if lam > 1e6:
        raise ValueError(f"refusing to scatter {lam:.3g} rocks (> 1e6)")
    if lam == 0:
        return []

    gen = philox(spec.seed, "rock-scatter")
    count = int(gen.poisson(lam))
    xs = gen.uniform(0.0, ex, size=count)
    ys = gen.uniform(0.0, ey, size=count)
    log_lo, log_hi = math.log(spec.scale_min), math.log(spec.scale_max)
    diameters = np.exp(gen.uniform(log_lo, log_hi, size=count))
    yaws = gen.uniform(0.0, 2.0 * math.pi, size=count)

    rocks = []
    for i in range(count):
        d = float(diameters[i])
        mesh = _rock_mesh(hash_u64(spec.seed, 0x524F434B, i), spec.shape_irregularity, d)
        rot = _rotation_z(float(yaws[i]))
        if spec.orientation == "aligned":
            rot = _align_z_to(_surface_normal(hf, float(xs[i]), float(ys[i]))) @ rot
        z_surface = hf.sample(float(xs[i]), float(ys[i]))
        # base sits ROCK_EMBED_FRACTION * diameter below the local surface
        cz = z_surface + d / 2.0 - ROCK_EMBED_FRACTION * d
        center = np.array([xs[i], ys[i], cz])
        tf = np.eye(4)
        tf[:3, :3] = rot
        tf[:3, 3] = center
        world = mesh.positions @ rot.T + center
        rocks.append(
            RockInstance(
                mesh=TriangleMesh(
                    positions=world,
                    normals=mesh.normals @ rot.T,
                    faces=mesh.faces,
                    object_coords=world.copy(),
                ),
                transform=tf,
                instance_id=i + 1,
                material_id=material_id,
                center=center,
                diameter=d,
            )
        )
    return rocks


def load_obj(path) -> TriangleMesh:
    """Minimal OBJ reader: v and f records only; polygons are fan-triangulated."""
    positions = []
    faces = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                positions.append([float(v) for v in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(tok.split("/")[0]) - 1 for tok in parts[1:]]
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
    if not positions or not faces:
        raise ValueError(f"no geometry found in OBJ file {path}")
    return mesh_from_arrays(np.array(positions), np.array(faces))


def save_obj(mesh: TriangleMesh, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in mesh.positions:
            fh.write(f"v {p[0]:.9g} {p[1]:.9g} {p[2]:.9g}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
