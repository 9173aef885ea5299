"""Vectorized numpy kernels: the reference semantics for the compiled backend.

Arithmetic contract (shared bit-for-bit with _native.pyx):
  * positions are widened to float64 before any math
  * camera transform: Xc = ((R00*x + R01*y) + R02*z) + t0 (rows likewise)
  * projection: invz = 1.0/Zc; u = (fx*Xc)*invz + cx; v = (fy*Yc)*invz + cy
  * a point rasterizes iff z_near <= Zc <= z_far and 0 <= u < W and 0 <= v < H;
    its pixel is (floor(u), floor(v))
  * pass 2 keeps a point iff Zc <= minz[pix] * (1.0 + eps_rel)
  * colors accumulate as uint64 sums; depth comparisons stay in float64
All reductions are min or integer add, so results do not depend on point
order or on how work is chunked across workers.
"""

from __future__ import annotations

import numpy as np


def assign_cells(positions, origin, cell_size, dims):
    """Grid cell id per point: floor((p - origin)/cell_size) clamped to dims."""
    p = positions.astype(np.float64)
    idx = np.floor((p - origin) / cell_size).astype(np.int64)
    np.clip(idx, 0, np.asarray(dims, dtype=np.int64) - 1, out=idx)
    return (idx[:, 0] * dims[1] + idx[:, 1]) * dims[2] + idx[:, 2]


def flatten_ranges(starts, ends):
    """Concatenated arange(starts[i], ends[i]) without a python loop."""
    lengths = ends - starts
    total = int(lengths.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    reps = np.repeat(ends - np.cumsum(lengths), lengths)
    return np.arange(total, dtype=np.int64) + reps


def project_min_depth(
    positions, starts, ends, rot, t, fx, fy, cx, cy,
    width, height, z_near, z_far, minz, pix_cache, z_cache,
):
    """Pass 1 over the index ranges [starts_i, ends_i): fold the per-pixel
    minimum camera depth into `minz` (flat, f64) and record each candidate's
    pixel (or -1 when it does not rasterize) and camera depth for pass 2.
    """
    idx = flatten_ranges(starts, ends)
    p = positions[idx].astype(np.float64)
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    xc = (rot[0, 0] * x + rot[0, 1] * y) + rot[0, 2] * z + t[0]
    yc = (rot[1, 0] * x + rot[1, 1] * y) + rot[1, 2] * z + t[1]
    zc = (rot[2, 0] * x + rot[2, 1] * y) + rot[2, 2] * z + t[2]
    with np.errstate(divide="ignore", invalid="ignore"):
        invz = 1.0 / zc
        u = (fx * xc) * invz + cx
        v = (fy * yc) * invz + cy
        ok = (
            (zc >= z_near) & (zc <= z_far)
            & (u >= 0.0) & (u < float(width))
            & (v >= 0.0) & (v < float(height))
        )
    z_cache[:] = zc
    pix_cache.fill(-1)
    where_ok = np.nonzero(ok)[0]
    pix = (
        np.floor(v[where_ok]).astype(np.int64) * width
        + np.floor(u[where_ok]).astype(np.int64)
    )
    pix_cache[where_ok] = pix
    np.minimum.at(minz, pix, zc[where_ok])


def project_accumulate(
    colors, starts, ends, pix_cache, z_cache, eps_rel, minz, accum,
):
    """Pass 2: integer-accumulate colors of points within the soft z tolerance
    of their pixel's minimum. accum is (H*W, 4) uint64: r, g, b sums + count.
    """
    idx = flatten_ranges(starts, ends)
    ok = pix_cache >= 0
    pix = pix_cache[ok]
    one_plus_eps = 1.0 + eps_rel
    keep = z_cache[ok] <= minz[pix] * one_plus_eps
    pix = pix[keep]
    cols = colors[idx[ok][keep]].astype(np.uint64)
    np.add.at(accum[:, 0], pix, cols[:, 0])
    np.add.at(accum[:, 1], pix, cols[:, 1])
    np.add.at(accum[:, 2], pix, cols[:, 2])
    np.add.at(accum[:, 3], pix, 1)


def min_pool_2x2(img):
    """2x2 stride-2 min pooling with ceil-division sizing; +inf pads the borders."""
    h, w = img.shape
    ph, pw = (h + 1) // 2 * 2, (w + 1) // 2 * 2
    p = np.full((ph, pw), np.inf, dtype=np.float32)
    p[:h, :w] = img
    return np.minimum(
        np.minimum(p[0::2, 0::2], p[0::2, 1::2]),
        np.minimum(p[1::2, 0::2], p[1::2, 1::2]),
    )


def laplacian_edges(img, threshold):
    """Edge mask from the 4-neighbor Laplacian cross, relative to center depth.

    Empty (+inf) neighbors take the center value so holes do not fire; image
    borders clamp-replicate. A pixel is an edge iff it is itself finite and
    |response| > threshold * depth.
    """
    c = img.astype(np.float64)
    pad = np.pad(c, 1, mode="edge")
    shifts = (pad[:-2, 1:-1], pad[2:, 1:-1], pad[1:-1, :-2], pad[1:-1, 2:])
    up, dn, lf, rt = (np.where(np.isfinite(s), s, c) for s in shifts)
    with np.errstate(invalid="ignore"):
        resp = (((up + dn) + lf) + rt) - 4.0 * c
        edge = np.isfinite(c) & (np.abs(resp) > threshold * c)
    return edge.astype(np.uint8)


def filter_keep(coarse, edges, fine, filter_strength):
    """One upsampling keep step: children survive iff within tolerance of a
    reference depth of their coarse parent (parent value, plus the 8-neighbor
    values when the parent is an edge pixel). Dropped pixels become +inf.
    """
    ch, cw = coarse.shape
    fh, fw = fine.shape
    base = np.where(np.isfinite(coarse), coarse.astype(np.float64), -np.inf)
    padded = np.full((ch + 2, cw + 2), -np.inf)
    padded[1:-1, 1:-1] = base
    nb = np.full((ch, cw), -np.inf)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            np.maximum(nb, padded[1 + dy : 1 + dy + ch, 1 + dx : 1 + dx + cw], out=nb)
    ref = np.where(edges.astype(bool), np.maximum(base, nb), base)
    ref_f = np.repeat(np.repeat(ref, 2, axis=0), 2, axis=1)[:fh, :fw]
    f = fine.astype(np.float64)
    with np.errstate(invalid="ignore"):
        keep = (
            np.isfinite(f)
            & np.isfinite(ref_f)
            & ((f - ref_f) <= filter_strength * ref_f)
        )
    return np.where(keep, fine, np.float32(np.inf))


def bilinear_fill(coarse, fine):
    """Fill +inf pixels of `fine` by bilinear interpolation of finite `coarse`
    values (weights renormalized over the finite support); returns a new array.
    Pixels with no finite support stay +inf.
    """
    ch, cw = coarse.shape
    fh, fw = fine.shape
    gy = 0.5 * np.arange(fh, dtype=np.float64) - 0.25
    gx = 0.5 * np.arange(fw, dtype=np.float64) - 0.25
    y0 = np.floor(gy).astype(np.int64)
    x0 = np.floor(gx).astype(np.int64)
    wy1 = gy - y0
    wx1 = gx - x0
    y1 = np.clip(y0 + 1, 0, ch - 1)
    x1 = np.clip(x0 + 1, 0, cw - 1)
    np.clip(y0, 0, ch - 1, out=y0)
    np.clip(x0, 0, cw - 1, out=x0)

    c = coarse.astype(np.float64)
    num = np.zeros((fh, fw))
    den = np.zeros((fh, fw))
    # Fixed accumulation order (y0x0, y0x1, y1x0, y1x1); weights are exact
    # multiples of 1/16 so this is reproducible across backends.
    for yy, wy in ((y0, 1.0 - wy1), (y1, wy1)):
        for xx, wx in ((x0, 1.0 - wx1), (x1, wx1)):
            vals = c[yy[:, None], xx[None, :]]
            wgt = wy[:, None] * wx[None, :]
            good = np.isfinite(vals)
            num += np.where(good, wgt * vals, 0.0)
            den += np.where(good, wgt, 0.0)
    out = fine.copy()
    hole = ~np.isfinite(fine)
    fillable = hole & (den > 0.0)
    with np.errstate(invalid="ignore"):
        out[fillable] = (num[fillable] / den[fillable]).astype(np.float32)
    return out
