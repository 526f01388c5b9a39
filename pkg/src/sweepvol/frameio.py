"""Frame stack and volume I/O.

Stacks live on disk as a JSON manifest plus one 8-bit grayscale image
per frame (binary PGM or PNG). The manifest either lists the frame files
explicitly (``frames``) or omits the list, in which case every .pgm/.png
in the manifest's directory is taken in lexicographic order. Volumes are
a raw uint8 payload (X fastest, then Y, then Z) with a JSON sidecar
carrying dims and voxel spacing. All writers are deterministic:
identical inputs give byte-identical files.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

DEFAULT_PIXEL_SPACING_MM = 0.3
DEFAULT_FRAME_SPACING_MM = 0.8

_IMAGE_SUFFIXES = (".pgm", ".png")


@dataclass
class AcquisitionMeta:
    """Frame geometry plus the physical spacing of pixels and frames."""

    width: int
    height: int
    frame_count: int
    pixel_spacing_x: float = DEFAULT_PIXEL_SPACING_MM
    pixel_spacing_y: float = DEFAULT_PIXEL_SPACING_MM
    frame_spacing_z: float = DEFAULT_FRAME_SPACING_MM

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.frame_count < 1:
            raise ValueError("width, height and frame_count must be >= 1")
        for name in ("pixel_spacing_x", "pixel_spacing_y", "frame_spacing_z"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be positive and finite, got {v}")


@dataclass
class FrameStack:
    """Ordered 8-bit frames with acquisition metadata.

    frames has shape (frame_count, height, width), dtype uint8. A stack
    loaded through load_masks carries binary=True and holds only {0, 255}.
    """

    meta: AcquisitionMeta
    frames: np.ndarray
    binary: bool = field(default=False)

    def __post_init__(self):
        f = np.asarray(self.frames)
        if f.dtype != np.uint8 or f.ndim != 3:
            raise ValueError("frames must be a 3-D uint8 array")
        n, h, w = f.shape
        if (n, h, w) != (self.meta.frame_count, self.meta.height, self.meta.width):
            raise ValueError(
                f"frames shape {f.shape} does not match manifest "
                f"({self.meta.frame_count}, {self.meta.height}, {self.meta.width})"
            )
        self.frames = f

    def __len__(self):
        return self.frames.shape[0]


def read_image(path) -> np.ndarray:
    """Read an 8-bit grayscale PGM or PNG as a (height, width) uint8 array."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"frame file not found: {path}")
    if path.suffix.lower() == ".pgm":
        return _read_pgm(path)
    img = Image.open(path)
    if img.mode != "L":
        raise ValueError(f"{path}: not an 8-bit grayscale image (mode {img.mode})")
    return np.asarray(img, dtype=np.uint8)


def write_image(arr: np.ndarray, path) -> None:
    """Write a (height, width) uint8 array as PGM or PNG by extension."""
    path = Path(path)
    arr = np.ascontiguousarray(arr, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D frame")
    if path.suffix.lower() == ".pgm":
        h, w = arr.shape
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            fh.write(arr.tobytes())
    else:
        Image.fromarray(arr, "L").save(path)


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    tokens = []
    i = 0
    while len(tokens) < 4 and i < len(data):
        c = data[i:i + 1]
        if c == b"#":
            while i < len(data) and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            tokens.append(data[i:j])
            i = j
    if len(tokens) < 4 or tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary (P5) PGM file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM supported (maxval {maxval})")
    i += 1  # single whitespace byte separates header from payload
    payload = data[i:i + w * h]
    if len(payload) != w * h:
        raise ValueError(f"{path}: truncated PGM payload")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w).copy()


def _meta_from_manifest(doc: dict, path: Path) -> AcquisitionMeta:
    try:
        width = int(doc["width"])
        height = int(doc["height"])
        frame_count = int(doc["frame_count"])
    except KeyError as exc:
        raise ValueError(f"{path}: manifest missing required key {exc}") from exc
    return AcquisitionMeta(
        width=width,
        height=height,
        frame_count=frame_count,
        pixel_spacing_x=float(doc.get("pixel_spacing_x_mm", DEFAULT_PIXEL_SPACING_MM)),
        pixel_spacing_y=float(doc.get("pixel_spacing_y_mm", DEFAULT_PIXEL_SPACING_MM)),
        frame_spacing_z=float(doc.get("frame_spacing_z_mm", DEFAULT_FRAME_SPACING_MM)),
    )


def load_stack(manifest_path) -> FrameStack:
    """Load a frame stack from its JSON manifest.

    Frame order follows the manifest's frames list, or lexicographic
    filename order in directory mode (no frames list).
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise FileNotFoundError(f"manifest not found: {manifest_path}")
    doc = json.loads(manifest_path.read_text())
    meta = _meta_from_manifest(doc, manifest_path)
    base = manifest_path.parent
    if "frames" in doc:
        paths = [base / p for p in doc["frames"]]
    else:
        paths = sorted(
            p for p in base.iterdir()
            if p.is_file() and p.suffix.lower() in _IMAGE_SUFFIXES
        )
    if len(paths) != meta.frame_count:
        raise ValueError(
            f"{manifest_path}: manifest declares {meta.frame_count} frames "
            f"but {len(paths)} were found"
        )
    frames = np.empty((meta.frame_count, meta.height, meta.width), dtype=np.uint8)
    for k, p in enumerate(paths):
        img = read_image(p)
        if img.shape != (meta.height, meta.width):
            raise ValueError(
                f"frame {k} ({p.name}): size {img.shape[1]}x{img.shape[0]} "
                f"does not match manifest {meta.width}x{meta.height}"
            )
        frames[k] = img
    return FrameStack(meta=meta, frames=frames)


def save_stack(stack: FrameStack, out_dir, prefix="frame", fmt="pgm",
               manifest_name="manifest.json", subdir=None) -> Path:
    """Write a stack as frame files plus manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    frames_dir = out_dir / (subdir if subdir is not None else f"{prefix}s")
    frames_dir.mkdir(parents=True, exist_ok=True)
    rel_paths = []
    for k in range(len(stack)):
        name = f"{prefix}_{k:04d}.{fmt}"
        write_image(stack.frames[k], frames_dir / name)
        rel_paths.append(f"{frames_dir.name}/{name}")
    meta = stack.meta
    doc = {
        "width": meta.width,
        "height": meta.height,
        "frame_count": meta.frame_count,
        "pixel_spacing_x_mm": meta.pixel_spacing_x,
        "pixel_spacing_y_mm": meta.pixel_spacing_y,
        "frame_spacing_z_mm": meta.frame_spacing_z,
        "frames": rel_paths,
    }
    manifest_path = out_dir / manifest_name
    manifest_path.write_text(json.dumps(doc, indent=2) + "\n")
    return manifest_path


def load_masks(manifest_path) -> FrameStack:
    """Load a stack of binary masks; every pixel must be 0 or 255."""
    stack = load_stack(manifest_path)
    for k in range(len(stack)):
        frame = stack.frames[k]
        bad = np.nonzero((frame != 0) & (frame != 255))
        if bad[0].size:
            y, x = int(bad[0][0]), int(bad[1][0])
            raise ValueError(
                f"frame {k}: non-binary pixel value {int(frame[y, x])} "
                f"at (x={x}, y={y})"
            )
    stack.binary = True
    return stack


def _sidecar_path(payload_path: Path) -> Path:
    return payload_path.with_suffix(".json")


def save_volume(volume, payload_path) -> Path:
    """Write raw voxel payload plus JSON sidecar; returns the sidecar path.

    Payload is uint8, X fastest, then Y, then Z. Sidecar carries
    {"dims": [nx, ny, nz], "spacing_mm": [sx, sy, sz]}.
    """
    payload_path = Path(payload_path)
    data = np.ascontiguousarray(volume.data, dtype=np.uint8)
    if data.size == 0:
        raise ValueError("refusing to save an empty volume")
    payload_path.parent.mkdir(parents=True, exist_ok=True)
    payload_path.write_bytes(data.tobytes())
    nz, ny, nx = data.shape
    sidecar = {
        "dims": [nx, ny, nz],
        "spacing_mm": [float(s) for s in volume.spacing],
    }
    sidecar_path = _sidecar_path(payload_path)
    sidecar_path.write_text(json.dumps(sidecar, indent=2) + "\n")
    return sidecar_path


def load_volume(payload_path):
    """Load a volume saved by save_volume; bit-exact round trip."""
    from .reconstruct import Volume

    payload_path = Path(payload_path)
    sidecar_path = _sidecar_path(payload_path)
    if not payload_path.is_file():
        raise FileNotFoundError(f"volume payload not found: {payload_path}")
    if not sidecar_path.is_file():
        raise FileNotFoundError(f"volume sidecar not found: {sidecar_path}")
    doc = json.loads(sidecar_path.read_text())
    nx, ny, nz = (int(d) for d in doc["dims"])
    raw = payload_path.read_bytes()
    if len(raw) != nx * ny * nz:
        raise ValueError(
            f"{payload_path}: payload is {len(raw)} bytes, "
            f"expected {nx * ny * nz} for dims {doc['dims']}"
        )
    data = np.frombuffer(raw, dtype=np.uint8).reshape(nz, ny, nx).copy()
    sx, sy, sz = (float(s) for s in doc["spacing_mm"])
    return Volume(data=data, spacing=(sx, sy, sz))
