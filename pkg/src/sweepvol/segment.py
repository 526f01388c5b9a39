"""Target segmentation on enhanced frames.

Chain: global threshold, morphological closing with the 3x3 cross,
Suzuki-Abe outer-border following, selection of the largest contour not
touching the frame boundary, then either a Hough circle fit (tube mode)
or an even-odd fill of the contour itself (bone mode). The resulting
region masks the enhanced frame.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels


@dataclass(frozen=True)
class CircleFit:
    """Best-fitting circle in pixels with its accumulator vote count."""

    cx: int
    cy: int
    r: int
    votes: int


@dataclass
class SegmentationResult:
    mode: str                      # "circle" or "contour"
    target: np.ndarray             # (N, 2) int32 contour points (x, y)
    circle: CircleFit | None
    mask: np.ndarray               # uint8 {0, 255}
    segmented: np.ndarray          # enhanced frame under the mask


def _check_mask(mask) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.dtype != np.uint8 or mask.ndim != 2:
        raise ValueError("expected a 2-D uint8 mask")
    return mask


def threshold(frame: np.ndarray, t: int) -> np.ndarray:
    """Binary mask: 255 where pixel > t, else 0."""
    if not 0 <= t <= 255:
        raise ValueError(f"threshold must be in [0, 255], got {t}")
    frame = np.asarray(frame)
    return np.where(frame > t, 255, 0).astype(np.uint8)


def _dilate_cross(fg: np.ndarray) -> np.ndarray:
    out = fg.copy()
    out[1:, :] |= fg[:-1, :]
    out[:-1, :] |= fg[1:, :]
    out[:, 1:] |= fg[:, :-1]
    out[:, :-1] |= fg[:, 1:]
    return out


def _erode_cross(fg: np.ndarray) -> np.ndarray:
    out = fg.copy()
    out[0, :] = False
    out[-1, :] = False
    out[:, 0] = False
    out[:, -1] = False
    out[1:, :] &= fg[:-1, :]
    out[:-1, :] &= fg[1:, :]
    out[:, 1:] &= fg[:, :-1]
    out[:, :-1] &= fg[:, 1:]
    return out


def close_cross3(mask: np.ndarray) -> np.ndarray:
    """Morphological closing with the 5-pixel 3x3 cross.

    Computed on a one-pixel zero-padded grid: out-of-bounds is background
    for the dilation, and the erosion sees the dilation's virtual border
    pixels. This equals the infinite-plane closing restricted to the
    frame (one ring of padding provably suffices), which keeps closing
    extensive and idempotent for masks touching the boundary.
    """
    fg = np.pad(_check_mask(mask) > 0, 1, mode="constant")
    closed = _erode_cross(_dilate_cross(fg))[1:-1, 1:-1]
    return np.where(closed, 255, 0).astype(np.uint8)


def find_contours(mask: np.ndarray) -> list[np.ndarray]:
    """Outer border of every 8-connected foreground component.

    Suzuki-Abe border following, outer borders only; hole borders are
    walked for bookkeeping but not returned. Each contour is an (N, 2)
    int32 array of (x, y) in trace order, cyclically 8-connected.
    """
    mask = _check_mask(mask)
    pts, offsets = kernels.suzuki_outer_borders(mask)
    return [pts[offsets[i]:offsets[i + 1]] for i in range(len(offsets) - 1)]


def contour_area2(contour: np.ndarray) -> int:
    """Twice the shoelace area of the closed chain (exact integer)."""
    p = contour.astype(np.int64)
    q = np.roll(p, -1, axis=0)
    return abs(int(np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1])))


def select_target_contour(contours, width: int, height: int):
    """Largest-area contour with no point on the frame boundary.

    Area is the shoelace area of the chain; ties break on the smaller
    (y, x) of the first traced point. Returns None when nothing qualifies.
    """
    best = None
    best_key = None
    for c in contours:
        if c.shape[0] == 0:
            continue
        x = c[:, 0]
        y = c[:, 1]
        if (x == 0).any() or (x == width - 1).any() \
                or (y == 0).any() or (y == height - 1).any():
            continue
        key = (-contour_area2(c), int(c[0, 1]), int(c[0, 0]))
        if best_key is None or key < best_key:
            best = c
            best_key = key
    return best


@lru_cache(maxsize=256)
def _circle_offsets(r: int) -> np.ndarray:
    """Unique midpoint-circle raster offsets for radius r, sorted."""
    pts = set()
    x, y, d = r, 0, 1 - r
    while x >= y:
        pts.update([(x, y), (y, x), (-x, y), (-y, x),
                    (x, -y), (y, -x), (-x, -y), (-y, -x)])
        y += 1
        if d < 0:
            d += 2 * y + 1
        else:
            x -= 1
            d += 2 * (y - x) + 1
    return np.array(sorted(pts), dtype=np.int64)


def midpoint_circle_points(cx: int, cy: int, r: int) -> np.ndarray:
    """Midpoint-circle rasterization of a full circle, (N, 2) ints (x, y)."""
    offs = _circle_offsets(int(r))
    return offs + np.array([cx, cy], dtype=np.int64)


def fit_circle_hough(contour: np.ndarray, width: int, height: int,
                     r_min: int, r_max: int) -> CircleFit:
    """Best-fitting circle by a 3-parameter Hough accumulator.

    Each contour point votes for every integer center at distance r
    (midpoint-circle raster of the vote locus) for every candidate
    radius. The global vote maximum wins; ties break toward smaller r,
    then smaller cy, then smaller cx, which the C-order argmax over the
    (r, cy, cx) accumulator gives for free.
    """
    contour = np.asarray(contour)
    if contour.shape[0] < 3:
        raise ValueError("circle fit needs at least 3 contour points")
    if not 1 <= r_min <= r_max:
        raise ValueError(f"invalid radius range [{r_min}, {r_max}]")
    radii = range(r_min, r_max + 1)
    offs = [_circle_offsets(r) for r in radii]
    starts = np.zeros(len(offs) + 1, dtype=np.int64)
    starts[1:] = np.cumsum([o.shape[0] for o in offs])
    offsets = np.concatenate(offs, axis=0)
    points = np.ascontiguousarray(contour, dtype=np.int64)
    acc = kernels.hough_accumulate(points, offsets, starts, height, width)
    flat_best = int(np.argmax(acc))
    votes = int(acc.ravel()[flat_best])
    if votes < 1:
        raise ValueError("no circle center in range received any votes")
    ri, cy, cx = np.unravel_index(flat_best, acc.shape)
    return CircleFit(cx=int(cx), cy=int(cy), r=r_min + int(ri), votes=votes)


def fill_circle_mask(width: int, height: int, cx: int, cy: int, r: int) -> np.ndarray:
    """Mask of pixels with (x-cx)^2 + (y-cy)^2 <= r^2, clipped to bounds."""
    xs = np.arange(width, dtype=np.int64) - cx
    ys = np.arange(height, dtype=np.int64) - cy
    inside = xs[None, :] ** 2 + ys[:, None] ** 2 <= r * r
    return np.where(inside, 255, 0).astype(np.uint8)


def fill_contour_mask(contour: np.ndarray, width: int, height: int) -> np.ndarray:
    """Even-odd fill of the closed chain plus the chain pixels themselves.

    A pixel is inside when a ray cast toward +x crosses the polygon an
    odd number of times; with unit chain segments every crossing sits at
    the integer x of the edge endpoint with the lower y.
    """
    p = contour.astype(np.int64)
    q = np.roll(p, -1, axis=0)
    dy = q[:, 1] - p[:, 1]
    up = dy > 0
    down = dy < 0
    cys = np.concatenate([p[up, 1], q[down, 1]])
    cxs = np.concatenate([p[up, 0], q[down, 0]])
    order = np.lexsort((cxs, cys))
    cys = cys[order]
    cxs = np.ascontiguousarray(cxs[order])
    row_start = np.searchsorted(cys, np.arange(height + 1, dtype=np.int64), side="left")
    mask = kernels.fill_crossings_u8(cxs, row_start.astype(np.int64), width, height)
    mask[p[:, 1], p[:, 0]] = 255
    return mask


def apply_mask(enhanced: np.ndarray, region: np.ndarray) -> np.ndarray:
    """Keep enhanced pixels where region is 255, zero elsewhere."""
    enhanced = np.asarray(enhanced)
    region = np.asarray(region)
    if enhanced.shape != region.shape:
        raise ValueError(
            f"frame {enhanced.shape} and mask {region.shape} dimensions differ"
        )
    return np.where(region == 255, enhanced, 0).astype(np.uint8)


def segment_frame(enhanced: np.ndarray, mode: str = "circle", t: int = 49,
                  r_min: int = 5, r_max: int | None = None) -> SegmentationResult | None:
    """Run the full segmentation chain on one enhanced frame.

    Returns None when no contour clear of the frame boundary exists.
    mode "circle" masks with the filled Hough circle; mode "contour"
    masks with the even-odd fill of the selected contour.
    """
    if mode not in ("circle", "contour"):
        raise ValueError(f"unknown segmentation mode {mode!r}")
    enhanced = np.asarray(enhanced)
    h, w = enhanced.shape
    binary = threshold(enhanced, t)
    closed = close_cross3(binary)
    contours = find_contours(closed)
    target = select_target_contour(contours, w, h)
    if target is None:
        return None
    circle = None
    if mode == "circle":
        if r_max is None:
            r_max = min(w, h) // 2
        circle = fit_circle_hough(target, w, h, r_min, r_max)
        mask = fill_circle_mask(w, h, circle.cx, circle.cy, circle.r)
    else:
        mask = fill_contour_mask(target, w, h)
    return SegmentationResult(
        mode=mode,
        target=target,
        circle=circle,
        mask=mask,
        segmented=apply_mask(enhanced, mask),
    )
