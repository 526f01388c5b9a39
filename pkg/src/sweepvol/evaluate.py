"""Segmentation quality metrics: per-frame IoU and centerline fits."""

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .frameio import FrameStack
from .segment import CircleFit


@dataclass
class IoUReport:
    per_frame: list[tuple[int, float]]
    mean_iou: float
    sampled_indices: list[int]


@dataclass
class CenterlineFit:
    """Least-squares line of circle centers against frame index."""

    slope: tuple[float, float]       # px/frame, (x, y)
    intercept: tuple[float, float]   # px, (x, y)
    rms_residual: float              # px over both axes


def iou(a: np.ndarray, b: np.ndarray) -> float:
    """|a intersect b| / |a union b|; two empty masks count as 1.0."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"mask dimensions differ: {a.shape} vs {b.shape}")
    fa = a > 0
    fb = b > 0
    union = int(np.count_nonzero(fa | fb))
    if union == 0:
        return 1.0
    inter = int(np.count_nonzero(fa & fb))
    return inter / union


def mean_iou(auto: FrameStack, reference: FrameStack, sample: list[int]) -> IoUReport:
    """Per-frame IoU on the sampled indices and their arithmetic mean."""
    if len(auto) != len(reference):
        raise ValueError(
            f"stack lengths differ: {len(auto)} auto vs {len(reference)} reference"
        )
    per_frame = []
    for k in sample:
        k = int(k)
        if not 0 <= k < len(auto):
            raise IndexError(f"sample index {k} out of range for {len(auto)} frames")
        per_frame.append((k, iou(auto.frames[k], reference.frames[k])))
    mean = float(np.mean([v for _, v in per_frame])) if per_frame else 0.0
    return IoUReport(per_frame=per_frame, mean_iou=mean,
                     sampled_indices=[k for k, _ in per_frame])


def evenly_spaced_indices(n: int, count: int) -> list[int]:
    """count indices spread over [0, n-1], endpoints included."""
    if count < 1 or n < 1:
        raise ValueError("need n >= 1 and count >= 1")
    if count == 1:
        return [0]
    return [int(round(i * (n - 1) / (count - 1))) for i in range(count)]


def centerline_fit(circles: list[tuple[int, CircleFit]]) -> CenterlineFit:
    """Fit cx and cy independently against frame index by least squares."""
    if len(circles) < 2:
        raise ValueError("centerline fit needs at least 2 circles")
    k = np.array([idx for idx, _ in circles], dtype=np.float64)
    cx = np.array([c.cx for _, c in circles], dtype=np.float64)
    cy = np.array([c.cy for _, c in circles], dtype=np.float64)
    sx, ix = np.polyfit(k, cx, 1)
    sy, iy = np.polyfit(k, cy, 1)
    rx = cx - (sx * k + ix)
    ry = cy - (sy * k + iy)
    rms = float(np.sqrt((np.sum(rx ** 2) + np.sum(ry ** 2)) / (2 * len(circles))))
    return CenterlineFit(slope=(float(sx), float(sy)),
                         intercept=(float(ix), float(iy)),
                         rms_residual=rms)


def write_iou_csv(report: IoUReport, path) -> None:
    """CSV rows (frame_index, iou) plus a trailing mean summary row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame_index", "iou"])
        for k, v in report.per_frame:
            writer.writerow([k, f"{v:.6f}"])
        writer.writerow(["mean", f"{report.mean_iou:.6f}"])


def write_centerline_json(fit: CenterlineFit, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "slope_x_px_per_frame": fit.slope[0],
        "slope_y_px_per_frame": fit.slope[1],
        "intercept_x_px": fit.intercept[0],
        "intercept_y_px": fit.intercept[1],
        "rms_residual_px": fit.rms_residual,
    }
    path.write_text(json.dumps(doc, indent=2) + "\n")
