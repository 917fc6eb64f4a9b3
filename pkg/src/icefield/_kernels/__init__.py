"""Kernel backend selection.

The hot kernels (BVH ray casting, SAD cost volumes) exist twice: a compiled
Cython extension and a pure-numpy fallback with identical semantics. The
compiled backend is used when importable; set ICEFIELD_BACKEND=numpy (or
=native) to force a choice. `benchmarks/bench_kernels.py` compares the two.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import numpy_backend
from .numpy_backend import BARY_EPS, COST_INVALID, DET_EPS, T_MIN  # noqa: F401

try:
    from . import _native

    HAVE_NATIVE = True
except ImportError:  # extension not built; numpy fallback only
    _native = None
    HAVE_NATIVE = False


@dataclass
class TraceGeometry:
    """Flattened BVH plus leaf-ordered triangles, ready for the kernels."""

    bounds_min: np.ndarray
    bounds_max: np.ndarray
    miss_next: np.ndarray
    tri_start: np.ndarray
    tri_count: np.ndarray
    v0: np.ndarray  # (T, 3) leaf-ordered
    e1: np.ndarray
    e2: np.ndarray

    @property
    def n_triangles(self) -> int:
        return len(self.v0)


class NumpyKernels:
    name = "numpy"

    @staticmethod
    def trace_rays(geom, origins, dirs):
        return numpy_backend.trace_rays(geom, origins, dirs)

    @staticmethod
    def trace_any(geom, origins, dirs, t_max, skip_tri):
        return numpy_backend.trace_any(geom, origins, dirs, t_max, skip_tri)

    @staticmethod
    def sad_cost_volume(left, right, min_disp, num_disp, window):
        return numpy_backend.sad_cost_volume(left, right, min_disp, num_disp, window)


class NativeKernels:
    name = "native"

    @staticmethod
    def trace_rays(geom, origins, dirs):
        return _native.trace_rays(
            geom.bounds_min, geom.bounds_max, geom.miss_next,
            geom.tri_start, geom.tri_count, geom.v0, geom.e1, geom.e2,
            np.ascontiguousarray(origins, dtype=np.float64),
            np.ascontiguousarray(dirs, dtype=np.float64),
        )

    @staticmethod
    def trace_any(geom, origins, dirs, t_max, skip_tri):
        n = len(origins)
        t_max = np.ascontiguousarray(
            np.broadcast_to(np.asarray(t_max, dtype=np.float64), (n,))
        )
        skip_tri = np.ascontiguousarray(
            np.broadcast_to(np.asarray(skip_tri, dtype=np.int32), (n,))
        )
        return _native.trace_any(
            geom.bounds_min, geom.bounds_max, geom.miss_next,
            geom.tri_start, geom.tri_count, geom.v0, geom.e1, geom.e2,
            np.ascontiguousarray(origins, dtype=np.float64),
            np.ascontiguousarray(dirs, dtype=np.float64),
            t_max, skip_tri,
        )

    @staticmethod
    def sad_cost_volume(left, right, min_disp, num_disp, window):
        return _native.sad_cost_volume(
            np.ascontiguousarray(left, dtype=np.int64),
            np.ascontiguousarray(right, dtype=np.int64),
            int(min_disp), int(num_disp), int(window),
        )


def get_backend(name: str):
    if name == "numpy":
        return NumpyKernels
    if name == "native":
        if not HAVE_NATIVE:
            raise RuntimeError("native kernel extension is not built")
        return NativeKernels
    raise ValueError(f"unknown backend {name!r} (expected 'native' or 'numpy')")


def default_backend():
    forced = os.environ.get("ICEFIELD_BACKEND")
    if forced:
        return get_backend(forced)
    return NativeKernels if HAVE_NATIVE else NumpyKernels


kernels = default_backend()
BACKEND = kernels.name
