"""Pure-numpy kernel backend.

Implements the same three hot kernels as the compiled extension — nearest-hit
ray casting, any-hit occlusion, and the SAD cost volume — with identical
arithmetic. Ray kernels run a vectorized "wavefront" traversal of the
skip-pointer BVH: every active ray advances through the same node sequence a
scalar traversal would visit, and hit selection uses the same total order
(smaller t wins, ties to the lower triangle index), so results match the
native kernel bit for bit. The cost volume is exact integer arithmetic in
both backends.
"""

from __future__ import annotations

import numpy as np

# Shared intersection tolerances (the native kernel hard-codes the same values).
DET_EPS = 1e-14
BARY_EPS = 1e-10
T_MIN = 1e-9

COST_INVALID = np.iinfo(np.int64).max // 4


def _slab_hit(bmin, bmax, o, inv_d, t_limit):
    """Padded-box slab test; fmin/fmax drop NaNs like the C fmin/fmax."""
    t1 = (bmin - o) * inv_d
    t2 = (bmax - o) * inv_d
    near = np.fmin(t1, t2)
    far = np.fmax(t1, t2)
    tmin = np.fmax(np.fmax(np.fmax(near[:, 0], near[:, 1]), near[:, 2]), 0.0)
    tmax = np.fmin(np.fmin(np.fmin(far[:, 0], far[:, 1]), far[:, 2]), t_limit)
    return tmin <= tmax


def _tri_intersect(v0, e1, e2, o, d):
    """Moller-Trumbore with inclusive edge tolerance. Returns (ok, t)."""
    px = d[:, 1] * e2[:, 2] - d[:, 2] * e2[:, 1]
    py = d[:, 2] * e2[:, 0] - d[:, 0] * e2[:, 2]
    pz = d[:, 0] * e2[:, 1] - d[:, 1] * e2[:, 0]
    det = e1[:, 0] * px + e1[:, 1] * py + e1[:, 2] * pz
    ok = np.abs(det) >= DET_EPS
    inv = 1.0 / np.where(ok, det, 1.0)
    tx = o[:, 0] - v0[:, 0]
    ty = o[:, 1] - v0[:, 1]
    tz = o[:, 2] - v0[:, 2]
    u = (tx * px + ty * py + tz * pz) * inv
    ok &= (u >= -BARY_EPS) & (u <= 1.0 + BARY_EPS)
    qx = ty * e1[:, 2] - tz * e1[:, 1]
    qy = tz * e1[:, 0] - tx * e1[:, 2]
    qz = tx * e1[:, 1] - ty * e1[:, 0]
    v = (d[:, 0] * qx + d[:, 1] * qy + d[:, 2] * qz) * inv
    ok &= (v >= -BARY_EPS) & (u + v <= 1.0 + BARY_EPS)
    t = (e2[:, 0] * qx + e2[:, 1] * qy + e2[:, 2] * qz) * inv
    ok &= t > T_MIN
    return ok, t, u, v


def trace_rays(geom, origins, dirs):
    """Nearest hit per ray. Returns (t, tri, u, v); tri = -1 on miss."""
    o = np.ascontiguousarray(origins, dtype=np.float64)
    d = np.ascontiguousarray(dirs, dtype=np.float64)
    n = len(o)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_d = 1.0 / d

    best_t = np.full(n, np.inf)
    best_tri = np.full(n, -1, dtype=np.int32)
    best_u = np.zeros(n)
    best_v = np.zeros(n)
    cur = np.zeros(n, dtype=np.int32)

    active_idx = np.arange(n)
    while len(active_idx):
        node = cur[active_idx]
        hit = _slab_hit(
            geom.bounds_min[node],
            geom.bounds_max[node],
            o[active_idx],
            inv_d[active_idx],
            best_t[active_idx],
        )
        count = geom.tri_count[node]
        leaf_hit = hit & (count > 0)
        if leaf_hit.any():
            rays = active_idx[leaf_hit]
            start = geom.tri_start[node[leaf_hit]]
            cnt = count[leaf_hit]
            for k in range(int(cnt.max())):
                sel = cnt > k
                r = rays[sel]
                tri = (start[sel] + k).astype(np.int32)
                ok, t, u, v = _tri_intersect(
                    geom.v0[tri], geom.e1[tri], geom.e2[tri], o[r], d[r]
                )
                closer = ok & (
                    (t < best_t[r]) | ((t == best_t[r]) & (tri < best_tri[r]))
                )
                rr = r[closer]
                best_t[rr] = t[closer]
                best_tri[rr] = tri[closer]
                best_u[rr] = u[closer]
                best_v[rr] = v[closer]
        # advance: into subtree on internal hit, else skip it
        nxt = np.where(hit & (count == 0), node + 1, geom.miss_next[node])
        cur[active_idx] = nxt
        active_idx = active_idx[nxt != -1]

    return best_t, best_tri, best_u, best_v


def trace_any(geom, origins, dirs, t_max, skip_tri):
    """Any-hit occlusion test per ray (t in (T_MIN, t_max), skipping the
    originating triangle). Returns uint8 mask."""
    o = np.ascontiguousarray(origins, dtype=np.float64)
    d = np.ascontiguousarray(dirs, dtype=np.float64)
    n = len(o)
    t_max = np.broadcast_to(np.asarray(t_max, dtype=np.float64), (n,))
    skip_tri = np.broadcast_to(np.asarray(skip_tri, dtype=np.int32), (n,))
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_d = 1.0 / d

    occluded = np.zeros(n, dtype=bool)
    cur = np.zeros(n, dtype=np.int32)
    active_idx = np.arange(n)
    while len(active_idx):
        node = cur[active_idx]
        hit = _slab_hit(
            geom.bounds_min[node],
            geom.bounds_max[node],
            o[active_idx],
            inv_d[active_idx],
            t_max[active_idx],
        )
        count = geom.tri_count[node]
        leaf_hit = hit & (count > 0)
        if leaf_hit.any():
            rays = active_idx[leaf_hit]
            start = geom.tri_start[node[leaf_hit]]
            cnt = count[leaf_hit]
            for k in range(int(cnt.max())):
                sel = cnt > k
                r = rays[sel]
                tri = (start[sel] + k).astype(np.int32)
                ok, t, _, _ = _tri_intersect(
                    geom.v0[tri], geom.e1[tri], geom.e2[tri], o[r], d[r]
                )
                ok &= (t < t_max[r]) & (tri != skip_tri[r])
                occluded[r[ok]] = True
        nxt = np.where(hit & (count == 0), node + 1, geom.miss_next[node])
        cur[active_idx] = nxt
        active_idx = active_idx[(nxt != -1) & ~occluded[active_idx]]

    return occluded.astype(np.uint8)


def sad_cost_volume(left, right, min_disp, num_disp, window):
    """Box-filtered SAD cost volume, int64, (num_disp, H, W).

    cost[d, y, x] = sum over the window of |L - R shifted by (min_disp + d)|;
    COST_INVALID where the window leaves either image. Incremental summation
    keeps each plane O(H*W) regardless of window size.
    """
    L = np.ascontiguousarray(left, dtype=np.int64)
    R = np.ascontiguousarray(right, dtype=np.int64)
    h, w = L.shape
    half = window // 2
    vol = np.full((num_disp, h, w), COST_INVALID, dtype=np.int64)
    for di in range(num_disp):
        a = min_disp + di
        if a >= w:
            continue
        ad = np.zeros((h, w), dtype=np.int64)
        ad[:, a:] = np.abs(L[:, a:] - R[:, : w - a])
        sat = ad.cumsum(axis=0).cumsum(axis=1)
        sat = np.pad(sat, ((1, 0), (1, 0)))
        x0 = max(half, a + half)
        x1 = w - 1 - half
        y0, y1 = half, h - 1 - half
        if x0 > x1 or y0 > y1:
            continue
        win = (
            sat[y0 + half + 1 : y1 + half + 2, x0 + half + 1 : x1 + half + 2]
            - sat[y0 - half : y1 - half + 1, x0 + half + 1 : x1 + half + 2]
            - sat[y0 + half + 1 : y1 + half + 2, x0 - half : x1 - half + 1]
            + sat[y0 - half : y1 - half + 1, x0 - half : x1 - half + 1]
        )
        vol[di, y0 : y1 + 1, x0 : x1 + 1] = win
    return vol
