"""B-mode frame enhancement: log compression, squaring, median, CLAHE.

The stages compose as clahe(median3(square(log_compress(f)))) and every
pointwise map rounds half-up, so repeated runs are bit-identical.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels

# Pointwise maps as 256-entry lookup tables. log2 is exact on powers of
# two, which pins the half-way cases (e.g. input 15 -> 127.5 -> 128).
_LOG_LUT = np.floor(255.0 * np.log2(1.0 + np.arange(256)) / 8.0 + 0.5).astype(np.uint8)
_SQUARE_LUT = ((2 * np.arange(256, dtype=np.int64) ** 2 + 255) // 510).astype(np.uint8)


@dataclass
class ClaheParams:
    """CLAHE tile grid and relative clip limit (multiple of the mean bin)."""

    tiles_x: int = 8
    tiles_y: int = 8
    clip_limit_rel: float = 2.0

    def __post_init__(self):
        if self.tiles_x < 1 or self.tiles_y < 1:
            raise ValueError("tiles_x and tiles_y must be >= 1")
        if self.clip_limit_rel < 1.0:
            raise ValueError("clip_limit_rel must be >= 1.0")


def _check_frame(frame) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.dtype != np.uint8 or frame.ndim != 2:
        raise ValueError("expected a 2-D uint8 frame")
    return frame


def log_compress(frame: np.ndarray) -> np.ndarray:
    """out = round_half_up(255 * ln(1+x) / ln(256)); brightens low echoes."""
    return _LOG_LUT[_check_frame(frame)]


def square(frame: np.ndarray) -> np.ndarray:
    """out = round_half_up(x^2 / 255); stretches contrast upward."""
    return _SQUARE_LUT[_check_frame(frame)]


def median3(frame: np.ndarray) -> np.ndarray:
    """3x3 median filter with edge replication at the borders."""
    return kernels.median3_u8(_check_frame(frame))


def _blend_coords(coords: np.ndarray, centers: np.ndarray):
    """Bracketing tile indices and blend weight for each pixel coordinate.

    Outside the first/last tile centers the edge tile is replicated
    (both indices equal, weight 0).
    """
    n = centers.shape[0]
    hi = np.searchsorted(centers, coords, side="right")
    lo = hi - 1
    lo_c = np.clip(lo, 0, n - 1)
    hi_c = np.clip(hi, 0, n - 1)
    w = np.zeros(coords.shape[0], dtype=np.float64)
    interior = (lo >= 0) & (hi <= n - 1)
    if interior.any():
        c_lo = centers[lo_c[interior]]
        c_hi = centers[hi_c[interior]]
        w[interior] = (coords[interior] - c_lo) / (c_hi - c_lo)
    return lo_c.astype(np.int64), hi_c.astype(np.int64), w


def clahe(frame: np.ndarray, params: ClaheParams | None = None) -> np.ndarray:
    """Contrast-limited adaptive histogram equalization.

    The frame splits into tiles_y x tiles_x tiles with boundaries at
    floor(i * extent / tiles). Each tile gets a 256-bin histogram clipped
    at ceil(clip_limit_rel * tile_pixels / 256); the clipped excess is
    redistributed uniformly in a single pass, remainder one count each
    into bins 0..r-1. The tile mapping is the scaled CDF
    round_half_up(255 * cdf / tile_pixels), and each output pixel blends
    the 4 nearest tile mappings bilinearly by distance to tile centers.
    """
    frame = _check_frame(frame)
    if params is None:
        params = ClaheParams()
    h, w = frame.shape
    tx, ty = params.tiles_x, params.tiles_y
    if w < tx or h < ty:
        raise ValueError(
            f"tile smaller than 1 px: frame {w}x{h} cannot hold {tx}x{ty} tiles"
        )
    bx = (np.arange(tx + 1, dtype=np.int64) * w) // tx
    by = (np.arange(ty + 1, dtype=np.int64) * h) // ty

    luts = np.empty((ty, tx, 256), dtype=np.float64)
    for iy in range(ty):
        for ix in range(tx):
            tile = frame[by[iy]:by[iy + 1], bx[ix]:bx[ix + 1]]
            total = tile.size
            hist = np.bincount(tile.ravel(), minlength=256).astype(np.int64)
            clip = int(np.ceil(params.clip_limit_rel * total / 256.0))
            excess = int(np.sum(np.maximum(hist - clip, 0)))
            np.minimum(hist, clip, out=hist)
            bonus, rem = divmod(excess, 256)
            hist += bonus
            hist[:rem] += 1
            cdf = np.cumsum(hist)
            luts[iy, ix] = (510 * cdf + total) // (2 * total)

    centers_x = (bx[:-1] + bx[1:] - 1) / 2.0
    centers_y = (by[:-1] + by[1:] - 1) / 2.0
    tx0, tx1, wx = _blend_coords(np.arange(w, dtype=np.float64), centers_x)
    ty0, ty1, wy = _blend_coords(np.arange(h, dtype=np.float64), centers_y)
    return kernels.clahe_blend_u8(frame, luts, ty0, ty1, wy, tx0, tx1, wx)


def enhance_pipeline(frame: np.ndarray, params: ClaheParams | None = None) -> np.ndarray:
    """Full enhancement chain: log compression, squaring, median, CLAHE."""
    return clahe(median3(square(log_compress(frame))), params)
