# cython: boundscheck=False, wraparound=False, nonecheck=False, cdivision=True
# cython: language_level=3
"""Compiled hot kernels: BVH ray casting and SAD cost volumes.

Same skip-pointer traversal, intersection arithmetic (operation order
included) and tie-breaking as the numpy fallback; compiled with FP
contraction off so both backends return bit-identical results.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, fmax, fmin

cnp.import_array()

cdef double DET_EPS = 1e-14
cdef double BARY_EPS = 1e-10
cdef double T_MIN = 1e-9

COST_INVALID = np.iinfo(np.int64).max // 4


cdef inline bint _slab_hit(const double* bmin, const double* bmax,
                           const double* o, const double* inv_d,
                           double t_limit) noexcept nogil:
    cdef double t1, t2, tmin, tmax
    t1 = (bmin[0] - o[0]) * inv_d[0]
    t2 = (bmax[0] - o[0]) * inv_d[0]
    tmin = fmin(t1, t2)
    tmax = fmax(t1, t2)
    t1 = (bmin[1] - o[1]) * inv_d[1]
    t2 = (bmax[1] - o[1]) * inv_d[1]
    tmin = fmax(tmin, fmin(t1, t2))
    tmax = fmin(tmax, fmax(t1, t2))
    t1 = (bmin[2] - o[2]) * inv_d[2]
    t2 = (bmax[2] - o[2]) * inv_d[2]
    tmin = fmax(tmin, fmin(t1, t2))
    tmax = fmin(tmax, fmax(t1, t2))
    tmin = fmax(tmin, 0.0)
    tmax = fmin(tmax, t_limit)
    return tmin <= tmax


cdef inline bint _tri_hit(const double* v0, const double* e1, const double* e2,
                          const double* o, const double* d,
                          double* t_out, double* u_out, double* v_out) noexcept nogil:
    cdef double px, py, pz, det, inv, tx, ty, tz, u, qx, qy, qz, v, t
    px = d[1] * e2[2] - d[2] * e2[1]
    py = d[2] * e2[0] - d[0] * e2[2]
    pz = d[0] * e2[1] - d[1] * e2[0]
    det = e1[0] * px + e1[1] * py + e1[2] * pz
    if fabs(det) < DET_EPS:
        return False
    inv = 1.0 / det
    tx = o[0] - v0[0]
    ty = o[1] - v0[1]
    tz = o[2] - v0[2]
    u = (tx * px + ty * py + tz * pz) * inv
    if u < -BARY_EPS or u > 1.0 + BARY_EPS:
        return False
    qx = ty * e1[2] - tz * e1[1]
    qy = tz * e1[0] - tx * e1[2]
    qz = tx * e1[1] - ty * e1[0]
    v = (d[0] * qx + d[1] * qy + d[2] * qz) * inv
    if v < -BARY_EPS or u + v > 1.0 + BARY_EPS:
        return False
    t = (e2[0] * qx + e2[1] * qy + e2[2] * qz) * inv
    if t <= T_MIN:
        return False
    t_out[0] = t
    u_out[0] = u
    v_out[0] = v
    return True


def trace_rays(const double[:, ::1] bounds_min, const double[:, ::1] bounds_max,
               const int[::1] miss_next, const int[::1] tri_start,
               const int[::1] tri_count,
               const double[:, ::1] v0, const double[:, ::1] e1,
               const double[:, ::1] e2,
               const double[:, ::1] origins, const double[:, ::1] dirs):
    cdef Py_ssize_t n = origins.shape[0]
    t_arr = np.full(n, np.inf)
    tri_arr = np.full(n, -1, dtype=np.int32)
    u_arr = np.zeros(n)
    v_arr = np.zeros(n)
    cdef double[::1] best_t = t_arr
    cdef int[::1] best_tri = tri_arr
    cdef double[::1] best_u = u_arr
    cdef double[::1] best_v = v_arr

    cdef Py_ssize_t i
    cdef int node, k, tri, start, count
    cdef double o[3]
    cdef double d[3]
    cdef double inv_d[3]
    cdef double t, u, v

    with nogil:
        for i in range(n):
            o[0] = origins[i, 0]; o[1] = origins[i, 1]; o[2] = origins[i, 2]
            d[0] = dirs[i, 0]; d[1] = dirs[i, 1]; d[2] = dirs[i, 2]
            inv_d[0] = 1.0 / d[0]; inv_d[1] = 1.0 / d[1]; inv_d[2] = 1.0 / d[2]
            node = 0
            while node != -1:
                if _slab_hit(&bounds_min[node, 0], &bounds_max[node, 0],
                             o, inv_d, best_t[i]):
                    count = tri_count[node]
                    if count > 0:
                        start = tri_start[node]
                        for k in range(count):
                            tri = start + k
                            if _tri_hit(&v0[tri, 0], &e1[tri, 0], &e2[tri, 0],
                                        o, d, &t, &u, &v):
                                if t < best_t[i] or (t == best_t[i] and tri < best_tri[i]):
                                    best_t[i] = t
                                    best_tri[i] = tri
                                    best_u[i] = u
                                    best_v[i] = v
                        node = miss_next[node]
                    else:
                        node = node + 1
                else:
                    node = miss_next[node]
    return t_arr, tri_arr, u_arr, v_arr


def trace_any(const double[:, ::1] bounds_min, const double[:, ::1] bounds_max,
              const int[::1] miss_next, const int[::1] tri_start,
              const int[::1] tri_count,
              const double[:, ::1] v0, const double[:, ::1] e1,
              const double[:, ::1] e2,
              const double[:, ::1] origins, const double[:, ::1] dirs,
              const double[::1] t_max, const int[::1] skip_tri):
    cdef Py_ssize_t n = origins.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] occ = out

    cdef Py_ssize_t i
    cdef int node, k, tri, start, count
    cdef bint done
    cdef double o[3]
    cdef double d[3]
    cdef double inv_d[3]
    cdef double t, u, v

    with nogil:
        for i in range(n):
            o[0] = origins[i, 0]; o[1] = origins[i, 1]; o[2] = origins[i, 2]
            d[0] = dirs[i, 0]; d[1] = dirs[i, 1]; d[2] = dirs[i, 2]
            inv_d[0] = 1.0 / d[0]; inv_d[1] = 1.0 / d[1]; inv_d[2] = 1.0 / d[2]
            node = 0
            done = False
            while node != -1 and not done:
                if _slab_hit(&bounds_min[node, 0], &bounds_max[node, 0],
                             o, inv_d, t_max[i]):
                    count = tri_count[node]
                    if count > 0:
                        start = tri_start[node]
                        for k in range(count):
                            tri = start + k
                            if tri == skip_tri[i]:
                                continue
                            if _tri_hit(&v0[tri, 0], &e1[tri, 0], &e2[tri, 0],
                                        o, d, &t, &u, &v):
                                if t < t_max[i]:
                                    occ[i] = 1
                                    done = True
                                    break
                        node = miss_next[node]
                    else:
                        node = node + 1
                else:
                    node = miss_next[node]
    return out


def sad_cost_volume(const long long[:, ::1] left, const long long[:, ::1] right,
                    int min_disp, int num_disp, int window):
    cdef Py_ssize_t h = left.shape[0]
    cdef Py_ssize_t w = left.shape[1]
    cdef int half = window // 2
    vol_arr = np.full((num_disp, h, w), COST_INVALID, dtype=np.int64)
    cdef long long[:, :, ::1] vol = vol_arr
    sat_arr = np.zeros((h + 1, w + 1), dtype=np.int64)
    cdef long long[:, ::1] sat = sat_arr

    cdef int di, a
    cdef Py_ssize_t x, y, x0, x1, y0, y1
    cdef long long ad

    with nogil:
        for di in range(num_disp):
            a = min_disp + di
            if a >= w:
                continue
            # summed-area table of |L(x) - R(x - a)| (zero where undefined)
            for y in range(h):
                for x in range(w):
                    if x >= a:
                        ad = left[y, x] - right[y, x - a]
                        if ad < 0:
                            ad = -ad
                    else:
                        ad = 0
                    sat[y + 1, x + 1] = ad + sat[y, x + 1] + sat[y + 1, x] - sat[y, x]
            x0 = a + half
            if half > x0:
                x0 = half
            x1 = w - 1 - half
            y0 = half
            y1 = h - 1 - half
            for y in range(y0, y1 + 1):
                for x in range(x0, x1 + 1):
                    vol[di, y, x] = (sat[y + half + 1, x + half + 1]
                                     - sat[y - half, x + half + 1]
                                     - sat[y + half + 1, x - half]
                                     + sat[y - half, x - half])
    return vol_arr
