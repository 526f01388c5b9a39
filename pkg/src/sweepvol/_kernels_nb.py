"""Numba @njit implementations of the hot kernels.

Same names, signatures, and bit-identical results as _kernels_np; the
float kernels repeat the numpy expressions operation-for-operation so
both backends round identically. All kernels release the GIL so the
stack-level thread pool gets real parallelism.
"""

import numpy as np
from numba import njit

RING_DY = np.array([0, -1, -1, -1, 0, 1, 1, 1], dtype=np.int64)
RING_DX = np.array([-1, -1, 0, 1, 1, 1, 0, -1], dtype=np.int64)
_EAST = 4

DIR_INDEX = np.full((3, 3), -1, dtype=np.int64)
for _i in range(8):
    DIR_INDEX[RING_DY[_i] + 1, RING_DX[_i] + 1] = _i


@njit(nogil=True, cache=True)
def median3_u8(img):
    h, w = img.shape
    out = np.empty((h, w), dtype=np.uint8)
    buf = np.empty(9, dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            k = 0
            for dy in range(-1, 2):
                yy = y + dy
                if yy < 0:
                    yy = 0
                elif yy >= h:
                    yy = h - 1
                for dx in range(-1, 2):
                    xx = x + dx
                    if xx < 0:
                        xx = 0
                    elif xx >= w:
                        xx = w - 1
                    buf[k] = img[yy, xx]
                    k += 1
            for i in range(1, 9):
                v = buf[i]
                j = i - 1
                while j >= 0 and buf[j] > v:
                    buf[j + 1] = buf[j]
                    j -= 1
                buf[j + 1] = v
            out[y, x] = buf[4]
    return out


@njit(nogil=True, cache=True)
def clahe_blend_u8(img, luts, ty0, ty1, wy, tx0, tx1, wx):
    h, w = img.shape
    out = np.empty((h, w), dtype=np.uint8)
    for y in range(h):
        a0 = ty0[y]
        a1 = ty1[y]
        vy = wy[y]
        for x in range(w):
            v = img[y, x]
            b0 = tx0[x]
            b1 = tx1[x]
            vx = wx[x]
            l00 = luts[a0, b0, v]
            l01 = luts[a0, b1, v]
            l10 = luts[a1, b0, v]
            l11 = luts[a1, b1, v]
            val = (1.0 - vy) * ((1.0 - vx) * l00 + vx * l01) \
                + vy * ((1.0 - vx) * l10 + vx * l11)
            out[y, x] = np.uint8(np.floor(val + 0.5))
    return out


@njit(nogil=True, cache=True)
def hough_accumulate(points, offsets, starts, height, width):
    n_r = starts.shape[0] - 1
    acc = np.zeros((n_r, height, width), dtype=np.int32)
    n = points.shape[0]
    for ri in range(n_r):
        for oi in range(starts[ri], starts[ri + 1]):
            dx = offsets[oi, 0]
            dy = offsets[oi, 1]
            for pi in range(n):
                cx = points[pi, 0] + dx
                cy = points[pi, 1] + dy
                if 0 <= cx < width and 0 <= cy < height:
                    acc[ri, cy, cx] += 1
    return acc


@njit(nogil=True, cache=True)
def zinterp_stack_u8(stack, factor):
    n, h, w = stack.shape
    nz = (n - 1) * factor + 1
    out = np.empty((nz, h, w), dtype=np.uint8)
    for k in range(nz):
        q = k // factor
        m = k - q * factor
        if m == 0:
            out[k] = stack[q]
        else:
            for y in range(h):
                for x in range(w):
                    t = (factor - m) * np.int64(stack[q, y, x]) \
                        + m * np.int64(stack[q + 1, y, x])
                    out[k, y, x] = np.uint8((2 * t + factor) // (2 * factor))
    return out


@njit(nogil=True, cache=True)
def composite_rays_u8(rays, alpha_scale):
    h, w, length = rays.shape
    out = np.empty((h, w), dtype=np.uint8)
    for i in range(h):
        for j in range(w):
            color = 0.0
            opacity = 0.0
            for s in range(length):
                if opacity >= 0.999:
                    break
                v = np.float64(rays[i, j, s])
                a = v / 255.0 * alpha_scale
                color = color + (1.0 - opacity) * a * v
                opacity = opacity + (1.0 - opacity) * a
            val = np.floor(color + 0.5)
            if val > 255.0:
                val = 255.0
            elif val < 0.0:
                val = 0.0
            out[i, j] = np.uint8(val)
    return out


@njit(nogil=True, cache=True)
def fill_crossings_u8(cross_x, row_start, width, height):
    out = np.zeros((height, width), dtype=np.uint8)
    for y in range(height):
        s = row_start[y]
        e = row_start[y + 1]
        k = e - s
        if k == 0:
            continue
        j = s
        for x in range(width):
            while j < e and cross_x[j] <= x:
                j += 1
            if (k - (j - s)) % 2 == 1:
                out[y, x] = 255
    return out


@njit(nogil=True, cache=True)
def _append_point(pts, npts, x, y):
    if npts >= pts.shape[0]:
        grown = np.empty((pts.shape[0] * 2, 2), dtype=np.int32)
        grown[:npts] = pts
        pts = grown
    pts[npts, 0] = x
    pts[npts, 1] = y
    return pts, npts + 1


@njit(nogil=True, cache=True)
def _trace_border(f, sy, sx, enter_idx, nbd, pts, npts, record):
    h, w = f.shape
    found = -1
    for t in range(8):
        d = (enter_idx + t) % 8
        ny = sy + RING_DY[d]
        nx = sx + RING_DX[d]
        if 0 <= ny < h and 0 <= nx < w and f[ny, nx] != 0:
            found = d
            break
    if found == -1:
        f[sy, sx] = -nbd
        if record:
            pts, npts = _append_point(pts, npts, sx, sy)
        return pts, npts
    i1y = sy + RING_DY[found]
    i1x = sx + RING_DX[found]
    i2y, i2x = i1y, i1x
    i3y, i3x = np.int64(sy), np.int64(sx)
    guard = 4 * h * w + 8
    while guard > 0:
        guard -= 1
        d2 = DIR_INDEX[(i2y - i3y) + 1, (i2x - i3x) + 1]
        east_zero = False
        i4y = np.int64(-1)
        i4x = np.int64(-1)
        for t in range(1, 9):
            d = (d2 - t) % 8
            ny = i3y + RING_DY[d]
            nx = i3x + RING_DX[d]
            if 0 <= ny < h and 0 <= nx < w and f[ny, nx] != 0:
                i4y, i4x = ny, nx
                break
            if d == _EAST:
                east_zero = True
        if east_zero:
            f[i3y, i3x] = -nbd
        elif f[i3y, i3x] == 1:
            f[i3y, i3x] = nbd
        if record:
            pts, npts = _append_point(pts, npts, i3x, i3y)
        if i4y == sy and i4x == sx and i3y == i1y and i3x == i1x:
            break
        i2y, i2x = i3y, i3x
        i3y, i3x = i4y, i4x
    return pts, npts


@njit(nogil=True, cache=True)
def suzuki_outer_borders(mask):
    h, w = mask.shape
    f = np.zeros((h, w), dtype=np.int32)
    for y in range(h):
        for x in range(w):
            if mask[y, x] != 0:
                f[y, x] = 1
    pts = np.empty((1024, 2), dtype=np.int32)
    npts = 0
    offsets = np.empty(256, dtype=np.int32)
    offsets[0] = 0
    ncont = 0
    nbd = 1
    for y in range(h):
        for x in range(w):
            fv = f[y, x]
            if fv == 0:
                continue
            west0 = x == 0 or f[y, x - 1] == 0
            east0 = x == w - 1 or f[y, x + 1] == 0
            if fv == 1 and west0:
                nbd += 1
                pts, npts = _trace_border(f, y, x, 0, nbd, pts, npts, True)
                if ncont + 1 >= offsets.shape[0]:
                    grown = np.empty(offsets.shape[0] * 2, dtype=np.int32)
                    grown[:ncont + 1] = offsets[:ncont + 1]
                    offsets = grown
                ncont += 1
                offsets[ncont] = npts
            elif fv >= 1 and east0:
                nbd += 1
                pts, npts = _trace_border(f, y, x, _EAST, nbd, pts, npts, False)
    return pts[:npts].copy(), offsets[:ncont + 1].copy()
