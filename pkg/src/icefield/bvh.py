"""Bounding volume hierarchy over triangle soups.

Built by median split on the longest centroid axis, then flattened in DFS
order into a skip-pointer layout: when a node's box is hit the traversal
advances to index+1, when missed it jumps to `miss_next` (which skips the
whole subtree; -1 terminates). Leaves store a triangle range. The layout is
stackless, so the compiled kernel and the vectorized numpy fallback execute
the identical traversal.

Boxes are padded by a tiny epsilon so slab tests never hit the 0 * inf = NaN
corner case when a ray origin lies exactly on a box plane.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np

LEAF_SIZE = 4


@dataclass
class FlatBVH:
    bounds_min: np.ndarray  # (M, 3) float64, padded
    bounds_max: np.ndarray  # (M, 3)
    miss_next: np.ndarray  # (M,) int32, -1 = traversal done
    tri_start: np.ndarray  # (M,) int32, leaf triangle range start
    tri_count: np.ndarray  # (M,) int32, 0 for internal nodes
    order: np.ndarray  # (T,) int32 leaf-order -> original triangle index

    @property
    def n_nodes(self) -> int:
        return len(self.miss_next)

    @property
    def max_leaf_count(self) -> int:
        return int(self.tri_count.max())


def build_bvh(v0: np.ndarray, v1: np.ndarray, v2: np.ndarray) -> FlatBVH:
    n_tri = len(v0)
    if n_tri == 0:
        raise ValueError("cannot build a BVH over zero triangles")
    lo = np.minimum(np.minimum(v0, v1), v2)
    hi = np.maximum(np.maximum(v0, v1), v2)
    centroids = (lo + hi) * 0.5

    scene_scale = float(np.max(hi) - np.min(lo))
    pad = 1e-9 * max(scene_scale, 1.0) + 1e-12

    bounds_min: list[np.ndarray] = []
    bounds_max: list[np.ndarray] = []
    miss_next: list[int] = []
    tri_start: list[int] = []
    tri_count: list[int] = []
    order: list[np.ndarray] = []
    n_ordered = 0

    def emit(tri_idx: np.ndarray) -> None:
        nonlocal n_ordered
        me = len(miss_next)
        bounds_min.append(lo[tri_idx].min(axis=0) - pad)
        bounds_max.append(hi[tri_idx].max(axis=0) + pad)
        miss_next.append(-1)
        if len(tri_idx) <= LEAF_SIZE:
            tri_start.append(n_ordered)
            tri_count.append(len(tri_idx))
            order.append(tri_idx)
            n_ordered += len(tri_idx)
        else:
            tri_start.append(0)
            tri_count.append(0)
            axis = int(np.argmax(centroids[tri_idx].max(0) - centroids[tri_idx].min(0)))
            half = len(tri_idx) // 2
            part = np.argpartition(centroids[tri_idx, axis], half)
            emit(tri_idx[part[:half]])
            emit(tri_idx[part[half:]])
        # miss pointer = first node emitted after this subtree
        miss_next[me] = len(miss_next)

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4096))
    try:
        emit(np.arange(n_tri, dtype=np.int64))
    finally:
        sys.setrecursionlimit(old_limit)

    miss = np.asarray(miss_next, dtype=np.int32)
    miss[miss == len(miss)] = -1
    return FlatBVH(
        bounds_min=np.ascontiguousarray(bounds_min, dtype=np.float64),
        bounds_max=np.ascontiguousarray(bounds_max, dtype=np.float64),
        miss_next=miss,
        tri_start=np.asarray(tri_start, dtype=np.int32),
        tri_count=np.asarray(tri_count, dtype=np.int32),
        order=np.concatenate(order).astype(np.int32),
    )
