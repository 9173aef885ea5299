# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics (and float results) must stay bit-identical
to _numpy.py; see the arithmetic contract in that module's docstring.
Compiled with -ffp-contract=off so no FMA contraction diverges from numpy.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, floor, isfinite

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.uint64_t u64
ctypedef cnp.uint8_t u8


def assign_cells(
    const float[:, ::1] positions,
    const double[::1] origin,
    double cell_size,
    const i64[::1] dims,
):
    cdef Py_ssize_t n = positions.shape[0]
    out = np.empty(n, dtype=np.int64)
    cdef i64[::1] ids = out
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef i64 dx = dims[0], dy = dims[1], dz = dims[2]
    cdef i64 ix, iy, iz
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            ix = <i64>floor((<double>positions[k, 0] - ox) / cell_size)
            iy = <i64>floor((<double>positions[k, 1] - oy) / cell_size)
            iz = <i64>floor((<double>positions[k, 2] - oz) / cell_size)
            if ix < 0: ix = 0
            if ix > dx - 1: ix = dx - 1
            if iy < 0: iy = 0
            if iy > dy - 1: iy = dy - 1
            if iz < 0: iz = 0
            if iz > dz - 1: iz = dz - 1
            ids[k] = (ix * dy + iy) * dz + iz
    return out


def counting_sort(const i64[::1] ids, i64 n_cells):
    """Stable counting sort of point indices by cell id -> (offsets, order)."""
    cdef Py_ssize_t n = ids.shape[0]
    offsets_arr = np.zeros(n_cells + 1, dtype=np.int64)
    order_arr = np.empty(n, dtype=np.int64)
    cursor_arr = np.empty(n_cells, dtype=np.int64)
    cdef i64[::1] offsets = offsets_arr
    cdef i64[::1] order = order_arr
    cdef i64[::1] cursor = cursor_arr
    cdef Py_ssize_t k
    cdef i64 c
    with nogil:
        for k in range(n):
            offsets[ids[k] + 1] += 1
        for c in range(n_cells):
            offsets[c + 1] += offsets[c]
            cursor[c] = offsets[c]
        for k in range(n):
            c = ids[k]
            order[cursor[c]] = k
            cursor[c] += 1
    return offsets_arr, order_arr


def project_min_depth(
    const float[:, ::1] positions,
    const i64[::1] starts,
    const i64[::1] ends,
    const double[:, ::1] rot,
    const double[::1] t,
    double fx, double fy, double cx, double cy,
    i64 width, i64 height,
    double z_near, double z_far,
    double[::1] minz,
    i64[::1] pix_cache,
    double[::1] z_cache,
):
    cdef Py_ssize_t n_ranges = starts.shape[0]
    cdef double r00 = rot[0, 0], r01 = rot[0, 1], r02 = rot[0, 2]
    cdef double r10 = rot[1, 0], r11 = rot[1, 1], r12 = rot[1, 2]
    cdef double r20 = rot[2, 0], r21 = rot[2, 1], r22 = rot[2, 2]
    cdef double t0 = t[0], t1 = t[1], t2 = t[2]
    cdef double wd = <double>width, hd = <double>height
    cdef double x, y, z, xc, yc, zc, invz, u, v
    cdef Py_ssize_t r, i, k = 0
    cdef Py_ssize_t pix
    with nogil:
        for r in range(n_ranges):
            for i in range(starts[r], ends[r]):
                x = <double>positions[i, 0]
                y = <double>positions[i, 1]
                z = <double>positions[i, 2]
                zc = (r20 * x + r21 * y) + r22 * z + t2
                z_cache[k] = zc
                pix_cache[k] = -1
                if zc < z_near or zc > z_far:
                    k += 1
                    continue
                xc = (r00 * x + r01 * y) + r02 * z + t0
                yc = (r10 * x + r11 * y) + r12 * z + t1
                invz = 1.0 / zc
                u = (fx * xc) * invz + cx
                if u < 0.0 or u >= wd:
                    k += 1
                    continue
                v = (fy * yc) * invz + cy
                if v < 0.0 or v >= hd:
                    k += 1
                    continue
                pix = <Py_ssize_t>floor(v) * width + <Py_ssize_t>floor(u)
                pix_cache[k] = pix
                if zc < minz[pix]:
                    minz[pix] = zc
                k += 1
    return None


def project_accumulate(
    const u8[:, ::1] colors,
    const i64[::1] starts,
    const i64[::1] ends,
    const i64[::1] pix_cache,
    const double[::1] z_cache,
    double eps_rel,
    const double[::1] minz,
    u64[:, ::1] accum,
):
    cdef Py_ssize_t n_ranges = starts.shape[0]
    cdef double one_plus_eps = 1.0 + eps_rel
    cdef Py_ssize_t r, i, k = 0
    cdef i64 pix
    with nogil:
        for r in range(n_ranges):
            for i in range(starts[r], ends[r]):
                pix = pix_cache[k]
                if pix >= 0 and z_cache[k] <= minz[pix] * one_plus_eps:
                    accum[pix, 0] += colors[i, 0]
                    accum[pix, 1] += colors[i, 1]
                    accum[pix, 2] += colors[i, 2]
                    accum[pix, 3] += 1
                k += 1
    return None


def min_pool_2x2(const float[:, ::1] img):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t ch = (h + 1) // 2, cw = (w + 1) // 2
    out_arr = np.empty((ch, cw), dtype=np.float32)
    cdef float[:, ::1] out = out_arr
    cdef Py_ssize_t cy, cx, y1, x1
    cdef float m, v
    with nogil:
        for cy in range(ch):
            for cx in range(cw):
                m = INFINITY
                y1 = 2 * cy
                x1 = 2 * cx
                if img[y1, x1] < m: m = img[y1, x1]
                if x1 + 1 < w and img[y1, x1 + 1] < m: m = img[y1, x1 + 1]
                if y1 + 1 < h:
                    if img[y1 + 1, x1] < m: m = img[y1 + 1, x1]
                    if x1 + 1 < w and img[y1 + 1, x1 + 1] < m: m = img[y1 + 1, x1 + 1]
                out[cy, cx] = m
    return out_arr


def laplacian_edges(const float[:, ::1] img, double threshold):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef u8[:, ::1] out = out_arr
    cdef Py_ssize_t y, x
    cdef double c, up, dn, lf, rt, resp
    with nogil:
        for y in range(h):
            for x in range(w):
                c = <double>img[y, x]
                if not isfinite(c):
                    continue
                up = <double>img[y - 1, x] if y > 0 else c
                dn = <double>img[y + 1, x] if y + 1 < h else c
                lf = <double>img[y, x - 1] if x > 0 else c
                rt = <double>img[y, x + 1] if x + 1 < w else c
                if not isfinite(up): up = c
                if not isfinite(dn): dn = c
                if not isfinite(lf): lf = c
                if not isfinite(rt): rt = c
                resp = (((up + dn) + lf) + rt) - 4.0 * c
                if fabs(resp) > threshold * c:
                    out[y, x] = 1
    return out_arr


def filter_keep(
    const float[:, ::1] coarse,
    const u8[:, ::1] edges,
    const float[:, ::1] fine,
    double filter_strength,
):
    cdef Py_ssize_t ch = coarse.shape[0], cw = coarse.shape[1]
    cdef Py_ssize_t fh = fine.shape[0], fw = fine.shape[1]
    out_arr = np.full((fh, fw), np.inf, dtype=np.float32)
    cdef float[:, ::1] out = out_arr
    cdef Py_ssize_t cy, cx, ny, nx, fy, fx
    cdef double ref, c, v, f
    with nogil:
        for cy in range(ch):
            for cx in range(cw):
                c = <double>coarse[cy, cx]
                ref = c if isfinite(c) else -INFINITY
                if edges[cy, cx]:
                    for ny in range(cy - 1, cy + 2):
                        if ny < 0 or ny >= ch:
                            continue
                        for nx in range(cx - 1, cx + 2):
                            if nx < 0 or nx >= cw or (ny == cy and nx == cx):
                                continue
                            v = <double>coarse[ny, nx]
                            if isfinite(v) and v > ref:
                                ref = v
                if not isfinite(ref):
                    continue
                for fy in range(2 * cy, 2 * cy + 2):
                    if fy >= fh:
                        break
                    for fx in range(2 * cx, 2 * cx + 2):
                        if fx >= fw:
                            break
                        f = <double>fine[fy, fx]
                        if isfinite(f) and (f - ref) <= filter_strength * ref:
                            out[fy, fx] = fine[fy, fx]
    return out_arr


def bilinear_fill(const float[:, ::1] coarse, const float[:, ::1] fine):
    cdef Py_ssize_t ch = coarse.shape[0], cw = coarse.shape[1]
    cdef Py_ssize_t fh = fine.shape[0], fw = fine.shape[1]
    out_arr = np.empty((fh, fw), dtype=np.float32)
    cdef float[:, ::1] out = out_arr
    cdef Py_ssize_t y, x
    cdef Py_ssize_t y0r, x0r, y0, y1, x0, x1
    cdef double gy, gx, wy1, wx1, wy0, wx0, num, den, w, v
    with nogil:
        for y in range(fh):
            gy = 0.5 * <double>y - 0.25
            y0r = <Py_ssize_t>floor(gy)
            wy1 = gy - <double>y0r
            wy0 = 1.0 - wy1
            y0 = y0r
            if y0 < 0: y0 = 0
            if y0 > ch - 1: y0 = ch - 1
            y1 = y0r + 1
            if y1 < 0: y1 = 0
            if y1 > ch - 1: y1 = ch - 1
            for x in range(fw):
                if isfinite(fine[y, x]):
                    out[y, x] = fine[y, x]
                    continue
                gx = 0.5 * <double>x - 0.25
                x0r = <Py_ssize_t>floor(gx)
                wx1 = gx - <double>x0r
                wx0 = 1.0 - wx1
                x0 = x0r
                if x0 < 0: x0 = 0
                if x0 > cw - 1: x0 = cw - 1
                x1 = x0r + 1
                if x1 < 0: x1 = 0
                if x1 > cw - 1: x1 = cw - 1
                num = 0.0
                den = 0.0
                # accumulation order matches _numpy.bilinear_fill: 00, 01, 10, 11
                v = <double>coarse[y0, x0]
                if isfinite(v):
                    w = wy0 * wx0
                    num = num + w * v
                    den = den + w
                v = <double>coarse[y0, x1]
                if isfinite(v):
                    w = wy0 * wx1
                    num = num + w * v
                    den = den + w
                v = <double>coarse[y1, x0]
                if isfinite(v):
                    w = wy1 * wx0
                    num = num + w * v
                    den = den + w
                v = <double>coarse[y1, x1]
                if isfinite(v):
                    w = wy1 * wx1
                    num = num + w * v
                    den = den + w
                out[y, x] = <float>(num / den) if den > 0.0 else INFINITY
    return out_arr
