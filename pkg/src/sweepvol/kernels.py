"""Backend dispatch for the hot kernels (see backend.py)."""

from .backend import NUMBA_ENABLED

if NUMBA_ENABLED:
    from ._kernels_nb import (
        clahe_blend_u8,
        composite_rays_u8,
        fill_crossings_u8,
        hough_accumulate,
        median3_u8,
        suzuki_outer_borders,
        zinterp_stack_u8,
    )
else:
    from ._kernels_np import (
        clahe_blend_u8,
        composite_rays_u8,
        fill_crossings_u8,
        hough_accumulate,
        median3_u8,
        suzuki_outer_borders,
        zinterp_stack_u8,
    )

__all__ = [
    "clahe_blend_u8",
    "composite_rays_u8",
    "fill_crossings_u8",
    "hough_accumulate",
    "median3_u8",
    "suzuki_outer_borders",
    "zinterp_stack_u8",
]
