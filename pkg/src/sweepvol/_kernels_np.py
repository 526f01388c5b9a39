"""Pure-numpy implementations of the hot kernels.

Every function here has a numba twin in _kernels_nb with the same name,
signature, and bit-identical output (verified by tests/test_backends.py).
Float expressions are written with the exact same operation order as the
numba loops so IEEE-754 results agree to the last bit.
"""

import numpy as np

# 8-neighbour ring in Suzuki clockwise order starting at West:
# W, NW, N, NE, E, SE, S, SW  (y grows downward)
RING_DY = np.array([0, -1, -1, -1, 0, 1, 1, 1], dtype=np.int64)
RING_DX = np.array([-1, -1, 0, 1, 1, 1, 0, -1], dtype=np.int64)
_EAST = 4

DIR_INDEX = np.full((3, 3), -1, dtype=np.int64)
for _i in range(8):
    DIR_INDEX[RING_DY[_i] + 1, RING_DX[_i] + 1] = _i


def median3_u8(img):
    """3x3 median with edge replication."""
    h, w = img.shape
    padded = np.pad(img, 1, mode="edge")
    windows = np.empty((9, h, w), dtype=np.uint8)
    k = 0
    for dy in range(3):
        for dx in range(3):
            windows[k] = padded[dy:dy + h, dx:dx + w]
            k += 1
    # median of 9 integers is the 5th order statistic, exact in float64
    return np.median(windows, axis=0).astype(np.uint8)


def clahe_blend_u8(img, luts, ty0, ty1, wy, tx0, tx1, wx):
    """Bilinear blend of the 4 nearest tile LUTs, round-half-up to uint8."""
    l00 = luts[ty0[:, None], tx0[None, :], img]
    l01 = luts[ty0[:, None], tx1[None, :], img]
    l10 = luts[ty1[:, None], tx0[None, :], img]
    l11 = luts[ty1[:, None], tx1[None, :], img]
    wxr = wx[None, :]
    wyr = wy[:, None]
    val = (1.0 - wyr) * ((1.0 - wxr) * l00 + wxr * l01) \
        + wyr * ((1.0 - wxr) * l10 + wxr * l11)
    return np.floor(val + 0.5).astype(np.uint8)


def hough_accumulate(points, offsets, starts, height, width):
    """Vote counts over (radius, cy, cx); offsets concatenated per radius."""
    n_r = starts.shape[0] - 1
    acc = np.zeros((n_r, height, width), dtype=np.int32)
    px = points[:, 0]
    py = points[:, 1]
    for ri in range(n_r):
        offs = offsets[starts[ri]:starts[ri + 1]]
        cx = (px[:, None] + offs[None, :, 0]).ravel()
        cy = (py[:, None] + offs[None, :, 1]).ravel()
        ok = (cx >= 0) & (cx < width) & (cy >= 0) & (cy < height)
        np.add.at(acc[ri], (cy[ok], cx[ok]), 1)
    return acc


def zinterp_stack_u8(stack, factor):
    """Round-half-up linear interpolation along the frame axis (exact ints)."""
    n, h, w = stack.shape
    nz = (n - 1) * factor + 1
    out = np.empty((nz, h, w), dtype=np.uint8)
    out[::factor] = stack
    if factor > 1:
        a = stack[:-1].astype(np.uint32)
        b = stack[1:].astype(np.uint32)
        for m in range(1, factor):
            t = (factor - m) * a + m * b
            out[m::factor] = ((2 * t + factor) // (2 * factor)).astype(np.uint8)
    return out


def composite_rays_u8(rays, alpha_scale):
    """Front-to-back emission/opacity compositing; rays along the last axis."""
    h, w, length = rays.shape
    color = np.zeros((h, w), dtype=np.float64)
    opacity = np.zeros((h, w), dtype=np.float64)
    for s in range(length):
        active = opacity < 0.999
        if not active.any():
            break
        v = rays[:, :, s].astype(np.float64)
        a = v / 255.0 * alpha_scale
        color = np.where(active, color + (1.0 - opacity) * a * v, color)
        opacity = np.where(active, opacity + (1.0 - opacity) * a, opacity)
    out = np.floor(color + 0.5)
    return np.clip(out, 0.0, 255.0).astype(np.uint8)


def fill_crossings_u8(cross_x, row_start, width, height):
    """Even-odd scanline fill from per-row sorted crossing x positions."""
    out = np.zeros((height, width), dtype=np.uint8)
    cols = np.arange(width)
    for y in range(height):
        xs = cross_x[row_start[y]:row_start[y + 1]]
        if xs.size == 0:
            continue
        greater = xs.size - np.searchsorted(xs, cols, side="right")
        out[y, (greater % 2) == 1] = 255
    return out


def _trace_border(f, sy, sx, enter_idx, nbd, record):
    """Suzuki-Abe border following from (sy, sx).

    enter_idx points at the background pixel the scan came from (West for
    outer borders, East for hole borders). Marks traced pixels in f with
    +/-nbd; returns the border as a list of (x, y) when record is set.
    """
    h, w = f.shape
    pts = []
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
            pts.append((sx, sy))
        return pts
    i1y = sy + RING_DY[found]
    i1x = sx + RING_DX[found]
    i2y, i2x = i1y, i1x
    i3y, i3x = sy, sx
    guard = 4 * h * w + 8
    while guard > 0:
        guard -= 1
        d2 = DIR_INDEX[(i2y - i3y) + 1, (i2x - i3x) + 1]
        east_zero = False
        i4y = -1
        i4x = -1
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
            pts.append((int(i3x), int(i3y)))
        if i4y == sy and i4x == sx and i3y == i1y and i3x == i1x:
            break
        i2y, i2x = i3y, i3x
        i3y, i3x = i4y, i4x
    return pts


def suzuki_outer_borders(mask):
    """Outer border of every 8-connected component, one contour each.

    Returns (points, offsets): points is an (N, 2) int32 array of (x, y)
    with contour i occupying points[offsets[i]:offsets[i+1]].

    The raster scan is restricted to precomputed candidate pixels (a
    foreground pixel can only start a border when its West or East
    neighbour is background, and background never changes), which keeps
    the Python loop proportional to border length rather than image area.
    """
    h, w = mask.shape
    fg = mask > 0
    f = fg.astype(np.int32)
    west_bg = np.ones_like(fg)
    west_bg[:, 1:] = ~fg[:, :-1]
    east_bg = np.ones_like(fg)
    east_bg[:, :-1] = ~fg[:, 1:]
    cand_y, cand_x = np.nonzero(fg & (west_bg | east_bg))

    all_pts = []
    offsets = [0]
    nbd = 1
    for y, x in zip(cand_y.tolist(), cand_x.tolist()):
        fv = f[y, x]
        west0 = x == 0 or f[y, x - 1] == 0
        east0 = x == w - 1 or f[y, x + 1] == 0
        if fv == 1 and west0:
            nbd += 1
            pts = _trace_border(f, y, x, 0, nbd, True)
            all_pts.extend(pts)
            offsets.append(len(all_pts))
        elif fv >= 1 and east0:
            nbd += 1
            _trace_border(f, y, x, _EAST, nbd, False)
    if all_pts:
        pts_arr = np.array(all_pts, dtype=np.int32)
    else:
        pts_arr = np.empty((0, 2), dtype=np.int32)
    return pts_arr, np.array(offsets, dtype=np.int32)
