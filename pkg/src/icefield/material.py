"""Parametric snow/ice surface appearance.

The material is a small slider model: albedo (base color), roughness,
specular, subsurface, transmission, plus optional procedural noise and image
texture modulation of the albedo via planar object-coordinate mapping.
Subsurface is wrap lighting: the diffuse cosine term becomes
wrap(n.wi, s) = max(0, (n.wi + s) / (1 + s)), which softens the terminator.

``shade`` returns the full per-light reflectance factor, cosine included:
the renderer multiplies it by the light's irradiance only. At subsurface 0
the wrap term is exactly the Lambert cosine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import noise
from .noise import NoiseSpec

# Linear cross-fade margin between repeated texture tiles (fraction of a tile).
TILE_BLEND_MARGIN = 0.1

_EPS_ROUGHNESS = 1e-3


@dataclass(frozen=True)
class ImageTexture:
    pixels: np.ndarray  # (H, W, 3) float in [0, 1], linear
    scale: float  # meters per tile

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("texture scale must be > 0")

    @staticmethod
    def from_png(path, scale: float) -> "ImageTexture":
        """Load an 8-bit sRGB PNG and decode it to linear values."""
        from .imgio import read_png8, srgb_decode

        return ImageTexture(pixels=srgb_decode(read_png8(path) / 255.0), scale=scale)


@dataclass(frozen=True)
class Material:
    albedo: tuple[float, float, float] = (0.8, 0.8, 0.85)
    roughness: float = 0.7
    specular: float = 0.1
    subsurface: float = 0.0
    transmission: float = 0.0
    texture_noise: Optional[NoiseSpec] = None
    texture_image: Optional[ImageTexture] = None

    def __post_init__(self):
        a = np.asarray(self.albedo, dtype=np.float64)
        if a.shape != (3,) or np.any(a < 0) or np.any(a > 1):
            raise ValueError("albedo must be RGB in [0,1]^3")
        object.__setattr__(self, "albedo", tuple(float(c) for c in a))
        for name in ("roughness", "specular", "subsurface", "transmission"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    @staticmethod
    def gray(value: float, **kw) -> "Material":
        return Material(albedo=(value, value, value), **kw)


def _tile_fetch(tex: ImageTexture, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Bilinear fetch with two half-tile-offset copies cross-faded inside
    TILE_BLEND_MARGIN of each copy's seam, hiding tile repetition. Periodic in
    (u, v) with period 1 by construction."""

    def bilinear(fu, fv):
        h, w = tex.pixels.shape[:2]
        x = fu * w - 0.5
        y = fv * h - 0.5
        x0 = np.floor(x).astype(np.int64)
        y0 = np.floor(y).astype(np.int64)
        tx = (x - x0)[..., None]
        ty = (y - y0)[..., None]
        x0m, x1m = x0 % w, (x0 + 1) % w
        y0m, y1m = y0 % h, (y0 + 1) % h
        p = tex.pixels
        top = p[y0m, x0m] * (1 - tx) + p[y0m, x1m] * tx
        bot = p[y1m, x0m] * (1 - tx) + p[y1m, x1m] * tx
        return top * (1 - ty) + bot * ty

    def seam_weight(f):
        return np.clip(np.minimum(f, 1.0 - f) / TILE_BLEND_MARGIN, 0.0, 1.0)

    f1u, f1v = u % 1.0, v % 1.0
    f2u, f2v = (u + 0.5) % 1.0, (v + 0.5) % 1.0
    w1 = seam_weight(f1u) * seam_weight(f1v)
    w2 = seam_weight(f2u) * seam_weight(f2v)
    a = bilinear(f1u, f1v)
    b = bilinear(f2u, f2v)
    wsum = (w1 + w2)[..., None]
    return (a * w1[..., None] + b * w2[..., None]) / wsum


def sample_albedo(m: Material, object_coord) -> np.ndarray:
    """Albedo at object coordinate(s) (..., 3): base color, noise-modulated,
    clamped to [0,1], then multiplied by the optional image texel (planar
    x/y mapping). Pure function of (material, coordinate)."""
    p = np.asarray(object_coord, dtype=np.float64)
    base = np.asarray(m.albedo)
    out = np.broadcast_to(base, p.shape[:-1] + (3,)).copy()
    if m.texture_noise is not None:
        mod = noise.eval_fbm(m.texture_noise, p[..., :2])
        out = out * (1.0 + np.asarray(mod)[..., None])
    out = np.clip(out, 0.0, 1.0)
    if m.texture_image is not None:
        u = p[..., 0] / m.texture_image.scale
        v = p[..., 1] / m.texture_image.scale
        out = out * _tile_fetch(m.texture_image, u, v)
    return out


def wrap_cosine(cos_i, subsurface):
    """max(0, (cos + s) / (1 + s)) — the wrap-lit diffuse cosine."""
    return np.maximum(0.0, (cos_i + subsurface) / (1.0 + subsurface))


def specular_exponent(roughness: float) -> float:
    r = max(roughness, _EPS_ROUGHNESS)
    return 2.0 / (r * r) - 2.0


def shade(m: Material, n, wi, wo, albedo_at_point) -> np.ndarray:
    """Reflectance factor for one light: multiply by the light's irradiance
    (flux density normal to wi) to get outgoing radiance.

    diffuse  = albedo/pi * (1 - transmission) * wrap(n.wi, subsurface)
    specular = specular * (e+2)/(2 pi) * (n.h)^e, gated to the upper
               hemisphere; e from roughness as 2/max(roughness, eps)^2 - 2.
    """
    n = np.asarray(n, dtype=np.float64)
    wi = np.asarray(wi, dtype=np.float64)
    wo = np.asarray(wo, dtype=np.float64)
    albedo_at_point = np.asarray(albedo_at_point, dtype=np.float64)

    cos_i = np.sum(n * wi, axis=-1)
    diffuse = (
        albedo_at_point
        / np.pi
        * (1.0 - m.transmission)
        * wrap_cosine(cos_i, m.subsurface)[..., None]
    )

    if m.specular > 0.0:
        h = wi + wo
        h_norm = np.linalg.norm(h, axis=-1, keepdims=True)
        h = h / np.where(h_norm == 0, 1.0, h_norm)
        cos_o = np.sum(n * wo, axis=-1)
        nh = np.clip(np.sum(n * h, axis=-1), 0.0, 1.0)
        e = specular_exponent(m.roughness)
        lobe = (e + 2.0) / (2.0 * np.pi) * nh**e
        gate = (cos_i > 0.0) & (cos_o > 0.0)
        spec = m.specular * lobe * gate
        return diffuse + spec[..., None]
    return diffuse
