"""Synthetic slanted-tube phantom with exact ground-truth masks.

A cylinder of radius tube_radius_mm is tilted by slant_deg from the
Z (probe motion) axis within the Y-Z plane. Each frame k images the
plane z = k * frame_spacing_z, whose intersection with the cylinder is
an ellipse: center drifts tan(slant) * frame_spacing_z / pixel_spacing_y
pixels per frame, semi-axes are r (along X) and r / cos(slant) (along
the drift direction). Masks rasterize the exact ellipse by pixel-center
inclusion, so downstream segmentation can be scored against analytic
ground truth.
"""

import math
from dataclasses import dataclass

import numpy as np

from .frameio import (
    DEFAULT_FRAME_SPACING_MM,
    DEFAULT_PIXEL_SPACING_MM,
    AcquisitionMeta,
    FrameStack,
)

_RAYLEIGH_MEAN = math.sqrt(math.pi / 2.0)
_EDGE_MARGIN_PX = 2.0


@dataclass
class TubePhantomParams:
    width: int = 100
    height: int = 128
    frame_count: int = 150
    pixel_spacing_x: float = DEFAULT_PIXEL_SPACING_MM
    pixel_spacing_y: float = DEFAULT_PIXEL_SPACING_MM
    frame_spacing_z: float = DEFAULT_FRAME_SPACING_MM
    tube_radius_mm: float = 4.0
    slant_deg: float = 5.0
    center0: tuple[float, float] | None = None     # defaults to frame center
    interior_mean: float = 150.0
    background_mean: float = 2.0
    speckle_scale: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.slant_deg < 90.0:
            raise ValueError("slant_deg must be in [0, 90)")
        if self.tube_radius_mm <= 0:
            raise ValueError("tube radius must be positive")
        if not (0.0 <= self.interior_mean <= 255.0
                and 0.0 <= self.background_mean <= 255.0):
            raise ValueError("intensity means must be in [0, 255]")
        if self.speckle_scale < 0:
            raise ValueError("speckle_scale must be >= 0")
        if self.center0 is None:
            self.center0 = (self.width / 2.0, self.height / 2.0)

    def meta(self) -> AcquisitionMeta:
        return AcquisitionMeta(
            width=self.width,
            height=self.height,
            frame_count=self.frame_count,
            pixel_spacing_x=self.pixel_spacing_x,
            pixel_spacing_y=self.pixel_spacing_y,
            frame_spacing_z=self.frame_spacing_z,
        )


def tube_semi_axes(params: TubePhantomParams) -> tuple[float, float]:
    """Ellipse semi-axes in pixels: (along X, along Y/drift)."""
    slant = math.radians(params.slant_deg)
    a = params.tube_radius_mm / params.pixel_spacing_x
    b = params.tube_radius_mm / (math.cos(slant) * params.pixel_spacing_y)
    return a, b


def tube_centers(params: TubePhantomParams) -> np.ndarray:
    """Analytic ellipse center (x, y) in pixels for every frame, (n, 2)."""
    slant = math.radians(params.slant_deg)
    drift = math.tan(slant) * params.frame_spacing_z / params.pixel_spacing_y
    k = np.arange(params.frame_count, dtype=np.float64)
    cx0, cy0 = params.center0
    centers = np.empty((params.frame_count, 2), dtype=np.float64)
    centers[:, 0] = cx0
    centers[:, 1] = cy0 + drift * k
    return centers


def _check_bounds(params: TubePhantomParams) -> None:
    a, b = tube_semi_axes(params)
    centers = tube_centers(params)
    lo_x = centers[:, 0].min() - a
    hi_x = centers[:, 0].max() + a
    lo_y = centers[:, 1].min() - b
    hi_y = centers[:, 1].max() + b
    if (lo_x < _EDGE_MARGIN_PX or hi_x > params.width - 1 - _EDGE_MARGIN_PX
            or lo_y < _EDGE_MARGIN_PX or hi_y > params.height - 1 - _EDGE_MARGIN_PX):
        raise ValueError(
            "tube exits frame bounds: ellipse spans "
            f"x [{lo_x:.1f}, {hi_x:.1f}], y [{lo_y:.1f}, {hi_y:.1f}] "
            f"in a {params.width}x{params.height} frame "
            f"(needs a {_EDGE_MARGIN_PX:.0f} px margin)"
        )


def _frame_rng(seed: int, k: int) -> np.random.Generator:
    # documented derivation: PCG64 seeded by SeedSequence((seed, frame))
    return np.random.default_rng(np.random.SeedSequence((seed, k)))


def _speckle(mean_map: np.ndarray, scale: float,
             rng: np.random.Generator) -> np.ndarray:
    """Multiplicative Rayleigh speckle, mean-preserving, clamped to [0, 255].

    value = mean * (1 + scale * (R - E[R])) with R Rayleigh of unit mode,
    so scale 0 reproduces the mean exactly and the expected value stays
    at the mean for any scale.
    """
    r = rng.rayleigh(1.0, mean_map.shape)
    vals = mean_map * (1.0 + scale * (r - _RAYLEIGH_MEAN))
    return np.clip(np.floor(vals + 0.5), 0, 255).astype(np.uint8)


def rasterize_tube_mask(params: TubePhantomParams, k: int) -> np.ndarray:
    """Ground-truth mask for frame k: pixel centers inside the ellipse."""
    a, b = tube_semi_axes(params)
    cx, cy = tube_centers(params)[k]
    xs = (np.arange(params.width, dtype=np.float64) - cx) / a
    ys = (np.arange(params.height, dtype=np.float64) - cy) / b
    inside = xs[None, :] ** 2 + ys[:, None] ** 2 <= 1.0
    return np.where(inside, 255, 0).astype(np.uint8)


def synth_tube_stack(params: TubePhantomParams) -> tuple[FrameStack, FrameStack]:
    """Generate (frames, ground-truth masks) for the slanted-tube phantom."""
    _check_bounds(params)
    meta = params.meta()
    frames = np.empty((params.frame_count, params.height, params.width), np.uint8)
    masks = np.empty_like(frames)
    for k in range(params.frame_count):
        mask = rasterize_tube_mask(params, k)
        masks[k] = mask
        mean_map = np.where(mask > 0, params.interior_mean, params.background_mean)
        frames[k] = _speckle(mean_map, params.speckle_scale, _frame_rng(params.seed, k))
    return (FrameStack(meta=meta, frames=frames),
            FrameStack(meta=meta, frames=masks, binary=True))


def synth_noise_frame(width: int, height: int, mean: float, speckle_scale: float,
                      seed: int, k: int) -> np.ndarray:
    """Uniform speckle frame; pure function of (seed, k)."""
    if not 0.0 <= mean <= 255.0:
        raise ValueError("mean must be in [0, 255]")
    mean_map = np.full((height, width), float(mean))
    return _speckle(mean_map, speckle_scale, _frame_rng(seed, k))
