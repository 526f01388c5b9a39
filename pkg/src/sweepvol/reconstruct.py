"""Volume assembly, slicing, and axis-aligned rendering.

Frames stack along Z (the probe/elevation axis). In-plane coordinates
map 1:1 onto the voxel grid, so trilinear resampling reduces to linear
interpolation between the two bracketing frames; planes at multiples of
the upsampling factor reproduce the original frames bit-exactly.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .frameio import FrameStack

AXES = ("x", "y", "z")


@dataclass
class Volume:
    """8-bit voxel grid; data is (nz, ny, nx) so X varies fastest in memory."""

    data: np.ndarray
    spacing: tuple[float, float, float]

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.dtype != np.uint8 or d.ndim != 3:
            raise ValueError("volume data must be a 3-D uint8 array")
        if any(s <= 0 for s in self.spacing):
            raise ValueError("voxel spacings must be positive")
        self.data = d

    @property
    def nx(self) -> int:
        return self.data.shape[2]

    @property
    def ny(self) -> int:
        return self.data.shape[1]

    @property
    def nz(self) -> int:
        return self.data.shape[0]


@dataclass
class RenderParams:
    axis: str = "z"
    mode: str = "composite"          # "mip" or "composite"
    alpha_scale: float = 0.1

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        if self.mode not in ("mip", "composite"):
            raise ValueError("mode must be 'mip' or 'composite'")
        if not 0.0 < self.alpha_scale <= 1.0:
            raise ValueError("alpha_scale must be in (0, 1]")


def default_z_upsample(meta) -> int:
    """Upsampling factor that brings voxels close to isotropic."""
    ratio = meta.frame_spacing_z / min(meta.pixel_spacing_x, meta.pixel_spacing_y)
    return max(1, int(math.floor(ratio + 0.5)))


def build_volume(stack: FrameStack, z_upsample: int | None = None) -> Volume:
    """Resample the frame stack into a voxel grid.

    Voxel (i, j, k) samples the stack at frame coordinate z = k/z_upsample,
    linearly interpolated (round-half-up) between the bracketing frames.
    Output Z spacing is frame_spacing_z / z_upsample.
    """
    if len(stack) < 2:
        raise ValueError("volume reconstruction needs at least 2 frames")
    if z_upsample is None:
        z_upsample = default_z_upsample(stack.meta)
    z_upsample = int(z_upsample)
    if z_upsample < 1:
        raise ValueError(f"z_upsample must be >= 1, got {z_upsample}")
    data = kernels.zinterp_stack_u8(stack.frames, z_upsample)
    meta = stack.meta
    spacing = (meta.pixel_spacing_x, meta.pixel_spacing_y,
               meta.frame_spacing_z / z_upsample)
    return Volume(data=data, spacing=spacing)


def trilinear_sample(volume: Volume, x: float, y: float, z: float) -> float:
    """Trilinear sample at real voxel coordinates; exact on lattice points."""
    nx, ny, nz = volume.nx, volume.ny, volume.nz
    if not (0.0 <= x <= nx - 1 and 0.0 <= y <= ny - 1 and 0.0 <= z <= nz - 1):
        raise ValueError(
            f"sample point ({x}, {y}, {z}) outside volume "
            f"[0, {nx - 1}] x [0, {ny - 1}] x [0, {nz - 1}]"
        )
    x0 = int(math.floor(x))
    y0 = int(math.floor(y))
    z0 = int(math.floor(z))
    x1 = min(x0 + 1, nx - 1)
    y1 = min(y0 + 1, ny - 1)
    z1 = min(z0 + 1, nz - 1)
    dx = x - x0
    dy = y - y0
    dz = z - z0
    d = volume.data
    c = 0.0
    c += (1 - dx) * (1 - dy) * (1 - dz) * d[z0, y0, x0]
    c += dx * (1 - dy) * (1 - dz) * d[z0, y0, x1]
    c += (1 - dx) * dy * (1 - dz) * d[z0, y1, x0]
    c += dx * dy * (1 - dz) * d[z0, y1, x1]
    c += (1 - dx) * (1 - dy) * dz * d[z1, y0, x0]
    c += dx * (1 - dy) * dz * d[z1, y0, x1]
    c += (1 - dx) * dy * dz * d[z1, y1, x0]
    c += dx * dy * dz * d[z1, y1, x1]
    return float(c)


def extract_slice(volume: Volume, axis: str, index: int) -> np.ndarray:
    """Orthogonal slice as a 2-D frame.

    Z slice -> XY image (X horizontal, Y vertical); X slice -> YZ image
    (Y horizontal, Z vertical); Y slice -> XZ image (X horizontal,
    Z vertical). The first named axis is always horizontal.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    extents = {"x": volume.nx, "y": volume.ny, "z": volume.nz}
    if not 0 <= index < extents[axis]:
        raise IndexError(f"slice index {index} out of range for axis "
                         f"{axis} (extent {extents[axis]})")
    if axis == "z":
        return np.ascontiguousarray(volume.data[index, :, :])
    if axis == "x":
        return np.ascontiguousarray(volume.data[:, :, index])
    return np.ascontiguousarray(volume.data[:, index, :])


def render_mip(volume: Volume, axis: str = "z") -> np.ndarray:
    """Maximum intensity projection along an axis-aligned ray bundle."""
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    if axis == "z":
        return np.max(volume.data, axis=0)
    if axis == "x":
        return np.max(volume.data, axis=2)
    return np.max(volume.data, axis=1)


def render_composite(volume: Volume, params: RenderParams) -> np.ndarray:
    """Front-to-back alpha compositing along axis-aligned rays.

    Per step alpha = (voxel/255) * alpha_scale with the voxel value as
    emission; rays enter at index 0 of the chosen axis and terminate
    early once accumulated opacity reaches 0.999.
    """
    if params.axis == "z":
        rays = np.transpose(volume.data, (1, 2, 0))
    elif params.axis == "x":
        rays = volume.data
    else:
        rays = np.transpose(volume.data, (0, 2, 1))
    rays = np.ascontiguousarray(rays)
    return kernels.composite_rays_u8(rays, float(params.alpha_scale))
