import json

import numpy as np
import pytest

from sweepvol.frameio import (
    AcquisitionMeta,
    FrameStack,
    load_masks,
    load_stack,
    load_volume,
    read_image,
    save_stack,
    save_volume,
    write_image,
)
from sweepvol.phantom import TubePhantomParams, synth_tube_stack
from sweepvol.reconstruct import Volume

from .conftest import make_stack


def test_pgm_round_trip(tmp_path, rng):
    img = rng.integers(0, 256, (13, 9)).astype(np.uint8)
    path = tmp_path / "img.pgm"
    write_image(img, path)
    assert np.array_equal(read_image(path), img)


def test_png_round_trip(tmp_path, rng):
    img = rng.integers(0, 256, (7, 11)).astype(np.uint8)
    path = tmp_path / "img.png"
    write_image(img, path)
    assert np.array_equal(read_image(path), img)


def test_pgm_with_comment_and_whitespace(tmp_path):
    img = np.arange(6, dtype=np.uint8).reshape(2, 3)
    path = tmp_path / "weird.pgm"
    path.write_bytes(b"P5 # comment\n# another\n 3\t2\n255\n" + img.tobytes())
    assert np.array_equal(read_image(path), img)


def test_non_grayscale_png_rejected(tmp_path):
    from PIL import Image

    path = tmp_path / "rgb.png"
    Image.new("RGB", (4, 4)).save(path)
    with pytest.raises(ValueError, match="grayscale"):
        read_image(path)


def test_stack_round_trip_and_order(tmp_path, rng):
    frames = rng.integers(0, 256, (3, 8, 8)).astype(np.uint8)
    stack = make_stack(frames)
    manifest = save_stack(stack, tmp_path)
    loaded = load_stack(manifest)
    assert np.array_equal(loaded.frames, frames)
    assert loaded.meta == stack.meta
    again = load_stack(manifest)
    assert np.array_equal(again.frames, loaded.frames)


def test_directory_mode_lexicographic_order(tmp_path):
    frames = np.stack([np.full((4, 4), v, np.uint8) for v in (10, 20, 30)])
    for name, frame in zip(("b.pgm", "a.pgm", "c.pgm"), frames):
        write_image(frame, tmp_path / name)
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({"width": 4, "height": 4, "frame_count": 3}))
    loaded = load_stack(manifest)
    # a.pgm, b.pgm, c.pgm -> values 20, 10, 30
    assert [int(f[0, 0]) for f in loaded.frames] == [20, 10, 30]
    assert loaded.meta.pixel_spacing_x == 0.3  # defaults applied
    assert loaded.meta.frame_spacing_z == 0.8


def test_manifest_dimension_mismatch(tmp_path):
    write_image(np.zeros((8, 8), np.uint8), tmp_path / "f0.pgm")
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps(
        {"width": 100, "height": 128, "frame_count": 1, "frames": ["f0.pgm"]}))
    with pytest.raises(ValueError, match="does not match manifest"):
        load_stack(manifest)


def test_manifest_frame_count_mismatch(tmp_path):
    write_image(np.zeros((4, 4), np.uint8), tmp_path / "f0.pgm")
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps(
        {"width": 4, "height": 4, "frame_count": 2, "frames": ["f0.pgm"]}))
    with pytest.raises(ValueError, match="declares 2 frames"):
        load_stack(manifest)


def test_missing_frame_file(tmp_path):
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps(
        {"width": 4, "height": 4, "frame_count": 1, "frames": ["nope.pgm"]}))
    with pytest.raises(FileNotFoundError):
        load_stack(manifest)


def test_track_spacing_preserved_on_round_trip(tmp_path):
    # 120 mm of linear travel over 150 frames -> 0.8 mm per frame
    spacing = 120.0 / 150.0
    frames = np.zeros((2, 4, 4), dtype=np.uint8)
    stack = make_stack(frames, fsz=spacing)
    manifest = save_stack(stack, tmp_path)
    loaded = load_stack(manifest)
    assert loaded.meta.frame_spacing_z == spacing == 0.8


def test_load_masks_binary_flag_and_round_trip(tmp_path):
    masks = np.zeros((2, 4, 4), dtype=np.uint8)
    masks[1, 2, 3] = 255
    stack = make_stack(masks)
    manifest = save_stack(stack, tmp_path, prefix="mask",
                          manifest_name="masks_manifest.json")
    loaded = load_masks(manifest)
    assert loaded.binary
    assert np.array_equal(loaded.frames, masks)


def test_load_masks_rejects_non_binary_with_location(tmp_path):
    masks = np.zeros((2, 4, 4), dtype=np.uint8)
    masks[1, 2, 3] = 7
    manifest = save_stack(make_stack(masks), tmp_path)
    with pytest.raises(ValueError, match=r"frame 1.*7.*x=3, y=2"):
        load_masks(manifest)


def test_all_zero_masks_load(tmp_path):
    manifest = save_stack(make_stack(np.zeros((2, 4, 4), np.uint8)), tmp_path)
    assert load_masks(manifest).binary


def test_phantom_masks_round_trip_bytes(tmp_path):
    params = TubePhantomParams(frame_count=3, frame_spacing_z=0.2, seed=2)
    _, masks = synth_tube_stack(params)
    manifest = save_stack(masks, tmp_path)
    loaded = load_masks(manifest)
    assert loaded.frames.tobytes() == masks.frames.tobytes()


def test_volume_round_trip_smallest(tmp_path):
    vol = Volume(data=np.zeros((1, 1, 1), dtype=np.uint8), spacing=(1, 1, 1))
    path = tmp_path / "v.raw"
    save_volume(vol, path)
    assert path.read_bytes() == b"\x00"
    doc = json.loads((tmp_path / "v.json").read_text())
    assert doc["dims"] == [1, 1, 1]


def test_volume_payload_is_x_fastest(tmp_path):
    data = np.arange(8, dtype=np.uint8).reshape(2, 2, 2)  # (nz, ny, nx)
    vol = Volume(data=data, spacing=(1, 1, 1))
    path = tmp_path / "v.raw"
    save_volume(vol, path)
    # x varies fastest, then y, then z
    assert path.read_bytes() == bytes(range(8))


def test_volume_round_trip_bit_exact(tmp_path, rng):
    data = rng.integers(0, 256, (32, 64, 64)).astype(np.uint8)
    vol = Volume(data=data, spacing=(0.3, 0.3, 0.4))
    path = tmp_path / "vol.raw"
    save_volume(vol, path)
    loaded = load_volume(path)
    assert loaded.data.tobytes() == data.tobytes()
    assert loaded.spacing == (0.3, 0.3, 0.4)


def test_volume_truncated_payload_rejected(tmp_path):
    vol = Volume(data=np.zeros((2, 2, 2), dtype=np.uint8), spacing=(1, 1, 1))
    path = tmp_path / "v.raw"
    save_volume(vol, path)
    path.write_bytes(b"\x00" * 5)
    with pytest.raises(ValueError, match="payload"):
        load_volume(path)


def test_meta_validation():
    with pytest.raises(ValueError):
        AcquisitionMeta(width=0, height=4, frame_count=1)
    with pytest.raises(ValueError):
        AcquisitionMeta(width=4, height=4, frame_count=1, frame_spacing_z=0.0)
    with pytest.raises(ValueError):
        AcquisitionMeta(width=4, height=4, frame_count=1,
                        pixel_spacing_x=float("nan"))


def test_frame_stack_validation():
    meta = AcquisitionMeta(width=4, height=4, frame_count=2)
    with pytest.raises(ValueError, match="does not match"):
        FrameStack(meta=meta, frames=np.zeros((2, 4, 5), dtype=np.uint8))
    with pytest.raises(ValueError, match="uint8"):
        FrameStack(meta=meta, frames=np.zeros((2, 4, 4), dtype=np.int32))
