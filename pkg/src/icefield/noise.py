"""Seedable 2D noise bases and fractal combinators.

All evaluators are pure functions of (spec, coordinate): same seed, same
point, same bits — across calls, threads and processes. Gradient noise uses a
seeded 256-entry permutation table with the quintic fade; Worley returns the
F1 (nearest feature) distance in cell units; turbulence is |perlin|.

``eval_basis`` applies the spec's base_frequency only. Octaves, gain,
lacunarity and amplitude apply in ``eval_fbm``, so an octaves=1 spec satisfies
``eval_fbm(spec, p) == spec.amplitude * eval_basis(spec, p)`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .rng import hash_u64, hash_unit_vec

BASES = ("perlin", "worley_f1", "midpoint_displacement", "turbulence")

_SQRT2 = math.sqrt(2.0)

# 8 unit gradients at 45 degree spacing; |perlin| <= sqrt(2)/2 for unit
# gradients, so results are scaled by sqrt(2) to cover [-1, 1].
_GRAD_X = np.array([math.cos(k * math.pi / 4) for k in range(8)])
_GRAD_Y = np.array([math.sin(k * math.pi / 4) for k in range(8)])


@dataclass(frozen=True)
class NoiseSpec:
    basis: str = "perlin"
    seed: int = 0
    octaves: int = 1
    lacunarity: float = 2.0
    gain: float = 0.5
    base_frequency: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown noise basis {self.basis!r}")
        if self.octaves < 1:
            raise ValueError("octaves must be >= 1")
        if not self.lacunarity > 1.0:
            raise ValueError("lacunarity must be > 1")
        if not 0.0 < self.gain <= 1.0:
            raise ValueError("gain must be in (0, 1]")
        if not self.base_frequency > 0.0:
            raise ValueError("base_frequency must be > 0")
        if self.amplitude < 0.0:
            raise ValueError("amplitude must be >= 0")


@lru_cache(maxsize=256)
def permutation_table(seed: int) -> np.ndarray:
    """Seeded Fisher-Yates shuffle of 0..255 (splitmix64-driven)."""
    perm = list(range(256))
    for i in range(255, 0, -1):
        j = hash_u64(seed, 0x5045524D, i) % (i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return np.array(perm, dtype=np.int64)


def _fade(t):
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def _perlin_raw(perm: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    xi = np.floor(x).astype(np.int64)
    yi = np.floor(y).astype(np.int64)
    xf = x - xi
    yf = y - yi
    u = _fade(xf)
    v = _fade(yf)

    def grad_dot(ix, iy, dx, dy):
        h = perm[(perm[ix & 255] + (iy & 255)) & 255] & 7
        return _GRAD_X[h] * dx + _GRAD_Y[h] * dy

    g00 = grad_dot(xi, yi, xf, yf)
    g10 = grad_dot(xi + 1, yi, xf - 1.0, yf)
    g01 = grad_dot(xi, yi + 1, xf, yf - 1.0)
    g11 = grad_dot(xi + 1, yi + 1, xf - 1.0, yf - 1.0)
    top = g00 + u * (g10 - g00)
    bot = g01 + u * (g11 - g01)
    return (top + v * (bot - top)) * _SQRT2


def worley_feature_point(seed: int, cx, cy):
    """Feature point of integer cell (cx, cy): the cell corner plus a hashed
    jitter in [0,1)^2. Exposed so tests can evaluate exactly at a feature."""
    fx = hash_unit_vec(seed, np.asarray(cx), np.asarray(cy), 0)
    fy = hash_unit_vec(seed, np.asarray(cx), np.asarray(cy), 1)
    return np.asarray(cx) + fx, np.asarray(cy) + fy


def _worley_f1_raw(seed: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    xi = np.floor(x).astype(np.int64)
    yi = np.floor(y).astype(np.int64)
    best = np.full(np.shape(x), np.inf)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            fx, fy = worley_feature_point(seed, xi + di, yi + dj)
            d = np.sqrt((x - fx) ** 2 + (y - fy) ** 2)
            best = np.minimum(best, d)
    return best


def eval_basis(spec: NoiseSpec, p) -> np.ndarray | float:
    """Single-octave basis value at point(s) p (meters), sampled at the
    spec's base_frequency. p is (..., 2)."""
    p = np.asarray(p, dtype=np.float64)
    x = p[..., 0] * spec.base_frequency
    y = p[..., 1] * spec.base_frequency
    return _eval_basis_scaled(spec, x, y)


def _eval_basis_scaled(spec: NoiseSpec, x, y):
    if spec.basis == "perlin":
        out = _perlin_raw(permutation_table(spec.seed), x, y)
    elif spec.basis == "turbulence":
        out = np.abs(_perlin_raw(permutation_table(spec.seed), x, y))
    elif spec.basis == "worley_f1":
        out = _worley_f1_raw(spec.seed, x, y)
    else:
        # midpoint displacement is a grid construction, not a point function
        raise ValueError(
            "basis 'midpoint_displacement' cannot be point-evaluated; "
            "use midpoint_displace()"
        )
    return out if out.ndim else float(out)


def eval_fbm(spec: NoiseSpec, p) -> np.ndarray | float:
    """Octave sum: sum_o amplitude * gain^o * basis(p * base_frequency * lacunarity^o)."""
    p = np.asarray(p, dtype=np.float64)
    x = p[..., 0] * spec.base_frequency
    y = p[..., 1] * spec.base_frequency
    total = np.zeros(np.shape(x))
    amp = spec.amplitude
    for _ in range(spec.octaves):
        total = total + amp * _eval_basis_scaled(spec, x, y)
        x = x * spec.lacunarity
        y = y * spec.lacunarity
        amp *= spec.gain
    return total if total.ndim else float(total)


def fbm_bound(spec: NoiseSpec) -> float:
    """Upper bound on |eval_fbm|: amplitude * sum(gain^o) * max|basis|."""
    basis_max = {"perlin": 1.0, "turbulence": 1.0, "worley_f1": _SQRT2}[spec.basis]
    return spec.amplitude * sum(spec.gain**o for o in range(spec.octaves)) * basis_max


def midpoint_displace(
    seed: int,
    size: int,
    roughness: float,
    initial_amplitude: float,
    cell_size: float = 1.0,
):
    """Diamond-square heightfield of shape size x size (size = 2^k + 1).

    Corners are pinned at 0. Each subdivision level draws offsets uniform in
    [-a, a] from a hash of (seed, level, x, y), with a scaled by `roughness`
    per level, so the grid is deterministic and order-independent.
    """
    from .terrain import HeightField

    k = size - 1
    if size < 3 or (k & (k - 1)) != 0:
        raise ValueError(f"size must be 2^k + 1 with k >= 1, got {size}")
    if not 0.0 < roughness < 1.0:
        raise ValueError("roughness must be in (0, 1)")
    if initial_amplitude < 0.0:
        raise ValueError("initial_amplitude must be >= 0")

    z = np.zeros((size, size))
    step = k
    amp = float(initial_amplitude)
    level = 0
    while step > 1:
        half = step // 2

        # diamond: square centers get the 4-corner mean plus an offset
        ci, cj = np.meshgrid(
            np.arange(half, size, step), np.arange(half, size, step), indexing="ij"
        )
        mean4 = (
            z[ci - half, cj - half]
            + z[ci - half, cj + half]
            + z[ci + half, cj - half]
            + z[ci + half, cj + half]
        ) / 4.0
        z[ci, cj] = mean4 + (2.0 * hash_unit_vec(seed, level, 0, ci, cj) - 1.0) * amp

        # square: edge midpoints get the mean of their orthogonal neighbors
        # (3 on borders) plus an offset
        ii, jj = np.meshgrid(np.arange(0, size, half), np.arange(0, size, half), indexing="ij")
        on_diamond = ((ii // half) + (jj // half)) % 2 == 1
        si = ii[on_diamond]
        sj = jj[on_diamond]
        acc = np.zeros(si.shape)
        cnt = np.zeros(si.shape)
        for di, dj in ((-half, 0), (half, 0), (0, -half), (0, half)):
            ni = si + di
            nj = sj + dj
            ok = (ni >= 0) & (ni < size) & (nj >= 0) & (nj < size)
            acc[ok] += z[ni[ok], nj[ok]]
            cnt[ok] += 1.0
        z[si, sj] = acc / cnt + (2.0 * hash_unit_vec(seed, level, 1, si, sj) - 1.0) * amp

        amp *= roughness
        step = half
        level += 1

    return HeightField(width=size, height=size, cell_size=cell_size, elevations=z)
