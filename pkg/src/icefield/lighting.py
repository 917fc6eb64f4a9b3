"""Sun, planetary-disc and ambient light sources.

The sun is a distant disc light: direction from elevation/azimuth, finite
angular diameter for soft shadows, irradiance in W/m^2 measured normal to the
light direction. The parent planet is modeled as a uniform-radiance disc of
the small-angle apparent size, since at workspace scale it is an unresolved
area light. A small uniform ambient term stands in for multi-bounce sky light
so shadows are never pure black.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Default dataset endpoints: Enceladus and Europa solar irradiance, W/m^2.
IRRADIANCE_ENCELADUS = 4.140
IRRADIANCE_EUROPA = 50.26
# Sun angular diameter used for all datasets, radians.
SUN_ANGULAR_DIAMETER = 0.01

_DEG_PER_RAD_SMALL_ANGLE = 57.3  # the small-angle constant, kept verbatim


@dataclass(frozen=True)
class SunLight:
    irradiance: float = IRRADIANCE_EUROPA  # W/m^2
    angular_diameter: float = SUN_ANGULAR_DIAMETER  # radians
    elevation: float = 35.0  # degrees in [0, 90]
    azimuth: float = 0.0  # degrees in [0, 360)
    color: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.irradiance < 0:
            raise ValueError("irradiance must be >= 0")
        if not self.angular_diameter > 0:
            raise ValueError("angular_diameter must be > 0")
        if not 0.0 <= self.elevation <= 90.0:
            raise ValueError("elevation must be in [0, 90] degrees")

    @property
    def direction(self) -> np.ndarray:
        return sun_direction(self.elevation, self.azimuth)


@dataclass(frozen=True)
class PlanetLight:
    body_diameter: float  # km
    distance: float  # km
    direction: tuple[float, float, float]  # unit, toward the planet
    disc_radiance_scale: float = 0.3  # fraction of sun irradiance reflected
    enabled: bool = True

    def __post_init__(self):
        if not self.distance > self.body_diameter / 2.0:
            raise ValueError("distance must exceed the body radius")
        if self.disc_radiance_scale < 0:
            raise ValueError("disc_radiance_scale must be >= 0")
        d = np.asarray(self.direction, dtype=np.float64)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("direction must be nonzero")
        object.__setattr__(self, "direction", tuple(d / n))

    @property
    def apparent_size_deg(self) -> float:
        return apparent_size(self.body_diameter, self.distance)

    @property
    def solid_angle(self) -> float:
        half = math.radians(self.apparent_size_deg) / 2.0
        return 2.0 * math.pi * (1.0 - math.cos(half))

    def disc_radiance(self, sun_irradiance: float) -> float:
        """Uniform disc radiance: scale * sun irradiance / (pi * solid angle)."""
        return self.disc_radiance_scale * sun_irradiance / (math.pi * self.solid_angle)

    def irradiance_normal(self, sun_irradiance: float) -> float:
        """Irradiance on a plane normal to the disc direction (radiance *
        solid angle)."""
        return self.disc_radiance(sun_irradiance) * self.solid_angle


@dataclass(frozen=True)
class AmbientLight:
    radiance: tuple[float, float, float] = (0.0, 0.0, 0.0)  # W/(m^2 sr)

    def __post_init__(self):
        r = np.asarray(self.radiance, dtype=np.float64)
        if r.shape != (3,) or np.any(r < 0):
            raise ValueError("ambient radiance must be nonnegative RGB")
        object.__setattr__(self, "radiance", tuple(float(c) for c in r))

    @staticmethod
    def from_sun(sun_irradiance: float, scale: float = 0.01) -> "AmbientLight":
        """Default sky term: radiance = scale * sun irradiance / pi."""
        L = scale * sun_irradiance / math.pi
        return AmbientLight(radiance=(L, L, L))


def apparent_size(body_diameter: float, distance: float) -> float:
    """Small-angle apparent size in degrees: 57.3 * diameter / distance."""
    if not distance > 0:
        raise ValueError("distance must be > 0")
    if body_diameter < 0:
        raise ValueError("body_diameter must be >= 0")
    return _DEG_PER_RAD_SMALL_ANGLE * body_diameter / distance


def sun_direction(elevation: float, azimuth: float) -> np.ndarray:
    """Unit vector toward the sun: (cos e cos a, cos e sin a, sin e)."""
    e = math.radians(elevation)
    a = math.radians(azimuth)
    return np.array([math.cos(e) * math.cos(a), math.cos(e) * math.sin(a), math.sin(e)])


def orthonormal_basis(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors completing a right-handed frame with `axis`."""
    a = np.asarray(axis, dtype=np.float64)
    helper = np.array([0.0, 0.0, 1.0]) if abs(a[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    t = np.cross(a, helper)
    t /= np.linalg.norm(t)
    b = np.cross(a, t)
    return t, b


def cone_directions(axis: np.ndarray, half_angle: float, u1, u2) -> np.ndarray:
    """Directions uniform over the solid-angle cone of `half_angle` about
    `axis`, from uniforms u1, u2 in [0, 1). Shapes broadcast; output (..., 3)."""
    u1 = np.asarray(u1, dtype=np.float64)
    u2 = np.asarray(u2, dtype=np.float64)
    cos_max = math.cos(half_angle)
    cos_t = 1.0 - u1 * (1.0 - cos_max)
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - cos_t * cos_t))
    phi = 2.0 * math.pi * u2
    t, b = orthonormal_basis(axis)
    return (
        sin_t[..., None] * np.cos(phi)[..., None] * t
        + sin_t[..., None] * np.sin(phi)[..., None] * b
        + cos_t[..., None] * np.asarray(axis)
    )


def sample_sun_cone(sun: SunLight, rng: np.random.Generator) -> np.ndarray:
    """One direction uniform in the sun's angular-diameter cone."""
    u = rng.random(2)
    return cone_directions(sun.direction, sun.angular_diameter / 2.0, u[0], u[1])
