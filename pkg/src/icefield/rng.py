"""Deterministic random number utilities.

Two generators are used throughout and are fixed here so that datasets are
reproducible bit-for-bit across platforms and processes:

* ``splitmix64`` coordinate hashing: a counter-based generator evaluated as a
  pure function of (seed, integer coordinates). All lattice noise, per-pixel
  sampling and midpoint-displacement offsets use this; there is no hidden
  stream state, so evaluation order never matters.
* numpy's ``Philox`` (4x64) bit generator for distribution sampling (Poisson
  rock counts, uniform positions). Philox is itself counter-based; streams are
  split by hashing a purpose tag into the key.
"""

from __future__ import annotations

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(x: int) -> int:
    # splitmix64 finalizer
    x &= _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def hash_u64(*vals: int) -> int:
    """Hash a tuple of integers to a uint64, order-sensitively."""
    h = _GOLDEN
    for v in vals:
        h = _mix((h + _GOLDEN) ^ _mix(v & _MASK))
    return h


def hash_unit(*vals: int) -> float:
    """Hash integers to a double in [0, 1)."""
    return (hash_u64(*vals) >> 11) * 2.0**-53


def _mix_vec(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(0xBF58476D1CE4E5B9)
    x ^= x >> np.uint64(27)
    x *= np.uint64(0x94D049BB133111EB)
    x ^= x >> np.uint64(31)
    return x


def hash_u64_vec(seed: int, *coords: np.ndarray) -> np.ndarray:
    """Vectorized ``hash_u64(seed, *coords)`` over integer arrays.

    Matches the scalar chain exactly: scalars and broadcast arrays hash to the
    same values, which the noise tests rely on.
    """
    h = np.uint64(_mix((_GOLDEN + _GOLDEN) ^ _mix(seed & _MASK)) & _MASK)
    h = np.broadcast_to(h, np.broadcast_shapes(*(np.shape(c) for c in coords)))
    h = np.atleast_1d(h.copy())
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        for c in coords:
            c = np.atleast_1d(np.asarray(c)).astype(np.uint64)
            h = _mix_vec((h + np.uint64(_GOLDEN)) ^ _mix_vec(c))
    shape = np.broadcast_shapes(*(np.shape(c) for c in coords))
    return h.reshape(shape)


def hash_unit_vec(seed: int, *coords: np.ndarray) -> np.ndarray:
    return (hash_u64_vec(seed, *coords) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def philox(seed: int, tag: str) -> np.random.Generator:
    """A Philox-backed Generator for the given seed and purpose tag."""
    key = hash_u64(seed, *[ord(c) for c in tag])
    return np.random.Generator(np.random.Philox(key=key))
