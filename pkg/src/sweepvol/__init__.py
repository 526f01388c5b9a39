"""sweepvol: 3D ultrasound volume reconstruction from linear-track sweeps."""

from .backend import backend_name
from .enhance import ClaheParams, clahe, enhance_pipeline, log_compress, median3, square
from .evaluate import CenterlineFit, IoUReport, centerline_fit, iou, mean_iou
from .frameio import (
    AcquisitionMeta,
    FrameStack,
    load_masks,
    load_stack,
    load_volume,
    save_stack,
    save_volume,
)
from .phantom import TubePhantomParams, synth_noise_frame, synth_tube_stack
from .pipeline import PipelineConfig, run_pipeline
from .reconstruct import (
    RenderParams,
    Volume,
    build_volume,
    extract_slice,
    render_composite,
    render_mip,
    trilinear_sample,
)
from .segment import (
    CircleFit,
    SegmentationResult,
    apply_mask,
    close_cross3,
    find_contours,
    fit_circle_hough,
    midpoint_circle_points,
    segment_frame,
    select_target_contour,
    threshold,
)

__version__ = "0.1.0"
