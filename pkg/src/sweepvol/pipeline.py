"""Stack-level orchestration of enhance -> segment -> reconstruct -> render.

Per-frame work can fan out over a thread pool (the hot kernels release
the GIL); results are assembled in frame order, so output bytes never
depend on the worker count. Frames where no boundary-free contour exists
contribute an all-zero mask so the output stacks stay index-aligned with
their inputs.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import frameio, reconstruct, segment
from .enhance import ClaheParams, clahe, enhance_pipeline, log_compress, median3, square
from .frameio import FrameStack
from .segment import CircleFit

STEP_NAMES = (
    "b_log_square",
    "c_median",
    "d_clahe",
    "e_threshold",
    "f_closed",
    "g_contour",
    "h_mask",
    "i_segmented",
)


@dataclass
class PipelineConfig:
    threshold: int = 49
    clahe: ClaheParams = field(default_factory=ClaheParams)
    mode: str = "circle"
    r_min: int = 5
    r_max: int | None = None
    z_upsample: int | None = None
    alpha_scale: float = 0.1
    dump_steps: bool = False
    threads: int = 1


@dataclass
class SegmentedStack:
    masks: FrameStack
    segmented: FrameStack
    circles: list[tuple[int, CircleFit]]
    frames_segmented: int


class PipelineError(RuntimeError):
    """Module failure wrapped with the frame index and stage name."""

    def __init__(self, frame_index: int, stage: str, cause: Exception):
        super().__init__(f"frame {frame_index}, stage {stage}: {cause}")
        self.frame_index = frame_index
        self.stage = stage


def _map_frames(fn, count: int, threads: int) -> list:
    if threads <= 1:
        return [fn(k) for k in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def enhance_stack(stack: FrameStack, cfg: PipelineConfig) -> FrameStack:
    def work(k):
        try:
            return enhance_pipeline(stack.frames[k], cfg.clahe)
        except Exception as exc:
            raise PipelineError(k, "enhance", exc) from exc

    out = np.stack(_map_frames(work, len(stack), cfg.threads))
    return FrameStack(meta=stack.meta, frames=out)


def segment_stack(enhanced: FrameStack, cfg: PipelineConfig) -> SegmentedStack:
    h, w = enhanced.meta.height, enhanced.meta.width

    def work(k):
        try:
            return segment.segment_frame(
                enhanced.frames[k], mode=cfg.mode, t=cfg.threshold,
                r_min=cfg.r_min, r_max=cfg.r_max,
            )
        except Exception as exc:
            raise PipelineError(k, "segment", exc) from exc

    results = _map_frames(work, len(enhanced), cfg.threads)
    masks = np.zeros_like(enhanced.frames)
    segmented = np.zeros_like(enhanced.frames)
    circles = []
    n_ok = 0
    for k, res in enumerate(results):
        if res is None:
            continue
        n_ok += 1
        masks[k] = res.mask
        segmented[k] = res.segmented
        if res.circle is not None:
            circles.append((k, res.circle))
    meta = enhanced.meta
    return SegmentedStack(
        masks=FrameStack(meta=meta, frames=masks, binary=True),
        segmented=FrameStack(meta=meta, frames=segmented),
        circles=circles,
        frames_segmented=n_ok,
    )


def _dump_frame_steps(frame: np.ndarray, cfg: PipelineConfig, step_dir: Path) -> None:
    step_dir.mkdir(parents=True, exist_ok=True)
    stage_b = square(log_compress(frame))
    stage_c = median3(stage_b)
    stage_d = clahe(stage_c, cfg.clahe)
    stage_e = segment.threshold(stage_d, cfg.threshold)
    stage_f = segment.close_cross3(stage_e)
    images = dict(zip(STEP_NAMES[:5], (stage_b, stage_c, stage_d, stage_e, stage_f)))
    res = segment.segment_frame(stage_d, mode=cfg.mode, t=cfg.threshold,
                                r_min=cfg.r_min, r_max=cfg.r_max)
    if res is not None:
        overlay = stage_d.copy()
        overlay[res.target[:, 1], res.target[:, 0]] = 255
        images["g_contour"] = overlay
        images["h_mask"] = res.mask
        images["i_segmented"] = res.segmented
    for name, img in images.items():
        frameio.write_image(img, step_dir / f"step_{name}.pgm")


def write_circles_json(circles: list[tuple[int, CircleFit]], path: Path) -> None:
    doc = [
        {"frame": k, "cx": c.cx, "cy": c.cy, "r": c.r, "votes": c.votes}
        for k, c in circles
    ]
    path.write_text(json.dumps(doc, indent=2) + "\n")


def run_pipeline(stack: FrameStack, cfg: PipelineConfig, out_dir) -> dict:
    """Run the full chain and write all artifacts under out_dir.

    Returns a summary dict with output paths and counters. When no frame
    yields a contour the volume and render steps are skipped.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    enhanced = enhance_stack(stack, cfg)
    seg = segment_stack(enhanced, cfg)

    mask_manifest = frameio.save_stack(
        seg.masks, out_dir, prefix="mask", manifest_name="masks_manifest.json")
    seg_manifest = frameio.save_stack(
        seg.segmented, out_dir, prefix="segmented",
        manifest_name="segmented_manifest.json")

    summary = {
        "frames_total": len(stack),
        "frames_segmented": seg.frames_segmented,
        "masks_manifest": str(mask_manifest),
        "segmented_manifest": str(seg_manifest),
        "volume": None,
        "renders": [],
    }

    if cfg.mode == "circle":
        circles_path = out_dir / "circles.json"
        write_circles_json(seg.circles, circles_path)
        summary["circles"] = str(circles_path)

    if cfg.dump_steps:
        for k in range(len(stack)):
            _dump_frame_steps(stack.frames[k], cfg, out_dir / "steps" / f"frame_{k:04d}")

    if seg.frames_segmented == 0:
        summary["warning"] = "0 frames segmented; volume reconstruction skipped"
        return summary

    volume = reconstruct.build_volume(seg.segmented, cfg.z_upsample)
    volume_path = out_dir / "volume.raw"
    frameio.save_volume(volume, volume_path)
    summary["volume"] = str(volume_path)
    summary["volume_dims"] = [volume.nx, volume.ny, volume.nz]

    renders_dir = out_dir / "renders"
    renders_dir.mkdir(exist_ok=True)
    renders = {
        "slice_xy.png": reconstruct.extract_slice(volume, "z", volume.nz // 2),
        "slice_yz.png": reconstruct.extract_slice(volume, "x", volume.nx // 2),
        "slice_xz.png": reconstruct.extract_slice(volume, "y", volume.ny // 2),
        "mip_z.png": reconstruct.render_mip(volume, "z"),
    }
    for name, img in renders.items():
        frameio.write_image(img, renders_dir / name)
        summary["renders"].append(str(renders_dir / name))
    return summary


def with_threads(cfg: PipelineConfig, threads: int) -> PipelineConfig:
    return replace(cfg, threads=threads)
