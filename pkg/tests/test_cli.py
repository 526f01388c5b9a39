import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from sweepvol.cli import main
from sweepvol.frameio import load_masks, load_stack, save_stack

from .conftest import make_stack


def tree_digest(root: Path) -> dict:
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            out[str(p.relative_to(root))] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


def synth_small(out_dir, extra=()):
    argv = ["synth", "--out", str(out_dir), "--frames", "8",
            "--slant-deg", "20", "--frame-spacing", "0.2", "--seed", "42",
            *extra]
    assert main(argv) == 0


def test_synth_default_geometry(tmp_path, capsys):
    out = tmp_path / "stack"
    assert main(["synth", "--out", str(out), "--frames", "3",
                 "--frame-spacing", "0.2", "--seed", "1"]) == 0
    stack = load_stack(out / "manifest.json")
    assert stack.meta.width == 100 and stack.meta.height == 128
    masks = load_masks(out / "masks_manifest.json")
    assert masks.binary
    assert "3 frames of 100x128" in capsys.readouterr().out


def test_synth_bone_geometry(tmp_path):
    out = tmp_path / "bone"
    assert main(["synth", "--out", str(out), "--frames", "5",
                 "--size", "128x128", "--frame-spacing", "0.1", "--seed", "2"]) == 0
    stack = load_stack(out / "manifest.json")
    assert stack.meta.width == 128 and stack.meta.height == 128
    assert stack.meta.frame_count == 5


def test_synth_same_seed_byte_identical(tmp_path):
    synth_small(tmp_path / "a")
    synth_small(tmp_path / "b")
    assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")


def test_synth_out_of_bounds_is_error(tmp_path, capsys):
    rc = main(["synth", "--out", str(tmp_path / "x"), "--frames", "150",
               "--slant-deg", "45"])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_pipeline_end_to_end(tmp_path, capsys):
    synth_small(tmp_path / "stack")
    out = tmp_path / "run"
    rc = main(["pipeline", "--stack", str(tmp_path / "stack" / "manifest.json"),
               "--out", str(out), "--z-upsample", "2"])
    assert rc == 0
    sidecar = json.loads((out / "volume.json").read_text())
    assert sidecar["dims"] == [100, 128, (8 - 1) * 2 + 1]
    for name in ("slice_xy.png", "slice_yz.png", "slice_xz.png", "mip_z.png"):
        assert (out / "renders" / name).is_file()
    assert (out / "circles.json").is_file()
    masks = load_masks(out / "masks_manifest.json")
    assert len(masks) == 8


def test_pipeline_dump_steps_writes_eight_images(tmp_path):
    stack_dir = tmp_path / "stack2"
    assert main(["synth", "--out", str(stack_dir), "--frames", "2",
                 "--slant-deg", "20", "--frame-spacing", "0.2", "--seed", "4"]) == 0
    out = tmp_path / "run"
    rc = main(["pipeline", "--stack", str(stack_dir / "manifest.json"),
               "--out", str(out), "--dump-steps", "--z-upsample", "1"])
    assert rc == 0
    step_dir = out / "steps" / "frame_0000"
    images = sorted(p.name for p in step_dir.iterdir())
    assert len(images) == 8
    assert images == [
        "step_b_log_square.pgm", "step_c_median.pgm", "step_d_clahe.pgm",
        "step_e_threshold.pgm", "step_f_closed.pgm", "step_g_contour.pgm",
        "step_h_mask.pgm", "step_i_segmented.pgm",
    ]


def test_pipeline_blank_stack_warns_and_exits_zero(tmp_path, capsys):
    blank = make_stack(np.zeros((3, 32, 32), dtype=np.uint8))
    manifest = save_stack(blank, tmp_path / "blank")
    out = tmp_path / "run"
    rc = main(["pipeline", "--stack", str(manifest), "--out", str(out)])
    assert rc == 0
    err = capsys.readouterr().err
    assert "0 frames segmented" in err
    assert not (out / "volume.raw").exists()


def test_enhance_segment_reconstruct_render_chain(tmp_path):
    synth_small(tmp_path / "stack")
    manifest = tmp_path / "stack" / "manifest.json"
    assert main(["enhance", "--stack", str(manifest),
                 "--out", str(tmp_path / "enh")]) == 0
    enh_manifest = tmp_path / "enh" / "enhanced_manifest.json"
    assert main(["segment", "--stack", str(enh_manifest),
                 "--out", str(tmp_path / "seg")]) == 0
    seg_manifest = tmp_path / "seg" / "segmented_manifest.json"
    assert main(["reconstruct", "--stack", str(seg_manifest),
                 "--out", str(tmp_path / "vol.raw"), "--z-upsample", "1"]) == 0
    assert main(["render", "--volume", str(tmp_path / "vol.raw"),
                 "--out", str(tmp_path / "mip.png"), "--mode", "mip"]) == 0
    assert main(["render", "--volume", str(tmp_path / "vol.raw"),
                 "--out", str(tmp_path / "comp.png"), "--mode", "composite",
                 "--alpha-scale", "0.2"]) == 0
    assert main(["render", "--volume", str(tmp_path / "vol.raw"),
                 "--out", str(tmp_path / "sl.png"), "--mode", "slice",
                 "--axis", "z", "--index", "0"]) == 0
    assert (tmp_path / "mip.png").is_file()
    assert (tmp_path / "comp.png").is_file()
    assert (tmp_path / "sl.png").is_file()


def test_evaluate_identical_stacks_prints_one(tmp_path, capsys):
    synth_small(tmp_path / "stack")
    masks = str(tmp_path / "stack" / "masks_manifest.json")
    capsys.readouterr()  # drop the synth progress line
    rc = main(["evaluate", "--auto", masks, "--ref", masks,
               "--out-csv", str(tmp_path / "iou.csv")])
    assert rc == 0
    assert capsys.readouterr().out.strip() == "1.0000"


def test_evaluate_every_8_on_150_frames_yields_19_samples(tmp_path, capsys):
    # index arithmetic only; use a stack of empty masks to keep it fast
    blank = make_stack(np.zeros((150, 8, 8), dtype=np.uint8))
    manifest = save_stack(blank, tmp_path / "masks")
    csv_path = tmp_path / "iou.csv"
    rc = main(["evaluate", "--auto", str(manifest), "--ref", str(manifest),
               "--sample", "every:8", "--out-csv", str(csv_path)])
    assert rc == 0
    rows = csv_path.read_text().strip().splitlines()
    assert len(rows) == 1 + 19 + 1  # header, samples, mean
    assert rows[1].startswith("0,") and rows[-2].startswith("144,")


def test_evaluate_centerline_output(tmp_path):
    synth_small(tmp_path / "stack")
    out = tmp_path / "run"
    assert main(["pipeline", "--stack", str(tmp_path / "stack" / "manifest.json"),
                 "--out", str(out), "--z-upsample", "1"]) == 0
    masks = str(out / "masks_manifest.json")
    ref = str(tmp_path / "stack" / "masks_manifest.json")
    centerline = tmp_path / "centerline.json"
    rc = main(["evaluate", "--auto", masks, "--ref", ref,
               "--out-csv", str(tmp_path / "iou.csv"),
               "--circles", str(out / "circles.json"),
               "--out-centerline", str(centerline)])
    assert rc == 0
    doc = json.loads(centerline.read_text())
    assert "rms_residual_px" in doc


def test_evaluate_misaligned_stacks_fail(tmp_path, capsys):
    a = save_stack(make_stack(np.zeros((2, 8, 8), np.uint8)), tmp_path / "a")
    b = save_stack(make_stack(np.zeros((3, 8, 8), np.uint8)), tmp_path / "b")
    rc = main(["evaluate", "--auto", str(a), "--ref", str(b),
               "--out-csv", str(tmp_path / "iou.csv")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_config_file_precedence(tmp_path):
    synth_small(tmp_path / "stack")
    manifest = str(tmp_path / "stack" / "manifest.json")
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"threshold": 254, "mode": "contour"}))

    # config alone: threshold 254 keeps only the brightest interior specks
    out_cfg = tmp_path / "run_cfg"
    assert main(["pipeline", "--stack", manifest, "--out", str(out_cfg),
                 "--config", str(config), "--z-upsample", "1"]) == 0
    # CLI flag overrides the config threshold
    out_cli = tmp_path / "run_cli"
    assert main(["pipeline", "--stack", manifest, "--out", str(out_cli),
                 "--config", str(config), "--threshold", "49",
                 "--z-upsample", "1"]) == 0
    masks_cfg = load_masks(out_cfg / "masks_manifest.json")
    masks_cli = load_masks(out_cli / "masks_manifest.json")
    assert np.count_nonzero(masks_cli.frames) > np.count_nonzero(masks_cfg.frames)
    # both runs took the contour mode from the config: no circles.json
    assert not (out_cfg / "circles.json").exists()
    assert not (out_cli / "circles.json").exists()


def test_contour_mode_pipeline(tmp_path):
    synth_small(tmp_path / "stack")
    out = tmp_path / "run"
    rc = main(["pipeline", "--stack", str(tmp_path / "stack" / "manifest.json"),
               "--out", str(out), "--mode", "contour", "--z-upsample", "1"])
    assert rc == 0
    assert not (out / "circles.json").exists()
    masks = load_masks(out / "masks_manifest.json")
    assert np.count_nonzero(masks.frames) > 0


def test_rerun_is_byte_identical(tmp_path):
    synth_small(tmp_path / "stack")
    manifest = str(tmp_path / "stack" / "manifest.json")
    for name in ("r1", "r2"):
        assert main(["pipeline", "--stack", manifest,
                     "--out", str(tmp_path / name), "--z-upsample", "2"]) == 0
    assert tree_digest(tmp_path / "r1") == tree_digest(tmp_path / "r2")


def test_unknown_stack_path_fails(tmp_path, capsys):
    rc = main(["pipeline", "--stack", str(tmp_path / "nope.json"),
               "--out", str(tmp_path / "out")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err
