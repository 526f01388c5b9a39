"""Command line interface.

Subcommands: synth | enhance | segment | reconstruct | render | evaluate
| pipeline. Option precedence is CLI flag > --config JSON > built-in
default. Diagnostics go to stderr; machine-readable output only to the
declared paths. Exit status 0 means no module error.
"""

import argparse
import json
import sys
from pathlib import Path

from . import evaluate as ev
from . import frameio, pipeline, reconstruct
from .enhance import ClaheParams
from .phantom import TubePhantomParams, synth_tube_stack
from .segment import CircleFit


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {text!r}") from exc


def _parse_pair(text: str) -> tuple[float, float]:
    try:
        a, b = text.split(",")
        return float(a), float(b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}") from exc


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return doc


def _pick(cli_value, config: dict, key: str, default):
    if cli_value is not None:
        return cli_value
    if key in config:
        return config[key]
    return default


def _pipeline_config(args, config: dict) -> pipeline.PipelineConfig:
    tiles = _pick(getattr(args, "tiles", None), config, "tiles", "8x8")
    if isinstance(tiles, str):
        tiles = _parse_size(tiles)
    return pipeline.PipelineConfig(
        threshold=int(_pick(getattr(args, "threshold", None), config, "threshold", 49)),
        clahe=ClaheParams(
            tiles_x=int(tiles[0]),
            tiles_y=int(tiles[1]),
            clip_limit_rel=float(_pick(getattr(args, "clip_limit", None),
                                       config, "clip_limit", 2.0)),
        ),
        mode=_pick(getattr(args, "mode", None), config, "mode", "circle"),
        r_min=int(_pick(getattr(args, "r_min", None), config, "r_min", 5)),
        r_max=_pick(getattr(args, "r_max", None), config, "r_max", None),
        z_upsample=_pick(getattr(args, "z_upsample", None), config, "z_upsample", None),
        alpha_scale=float(_pick(getattr(args, "alpha_scale", None),
                                config, "alpha_scale", 0.1)),
        dump_steps=bool(getattr(args, "dump_steps", False)),
        threads=int(_pick(getattr(args, "threads", None), config, "threads", 1)),
    )


def _parse_sample_spec(spec: str, n: int) -> list[int]:
    if spec == "all":
        return list(range(n))
    if spec.startswith("every:"):
        step = int(spec.split(":", 1)[1])
        if step < 1:
            raise ValueError(f"invalid sample step in {spec!r}")
        return list(range(0, n, step))
    return [int(tok) for tok in spec.split(",") if tok.strip()]


def cmd_synth(args) -> int:
    size = args.size if args.size is not None else (100, 128)
    ps = args.pixel_spacing if args.pixel_spacing is not None else (
        frameio.DEFAULT_PIXEL_SPACING_MM, frameio.DEFAULT_PIXEL_SPACING_MM)
    params = TubePhantomParams(
        width=size[0],
        height=size[1],
        frame_count=args.frames,
        pixel_spacing_x=ps[0],
        pixel_spacing_y=ps[1],
        frame_spacing_z=args.frame_spacing,
        tube_radius_mm=args.radius_mm,
        slant_deg=args.slant_deg,
        center0=args.center,
        interior_mean=args.interior_mean,
        background_mean=args.background_mean,
        speckle_scale=args.speckle_scale,
        seed=args.seed,
    )
    stack, masks = synth_tube_stack(params)
    out = Path(args.out)
    frameio.save_stack(stack, out, prefix="frame", manifest_name="manifest.json")
    frameio.save_stack(masks, out, prefix="mask", manifest_name="masks_manifest.json")
    print(f"wrote {len(stack)} frames of {params.width}x{params.height} to {out}")
    return 0


def cmd_enhance(args) -> int:
    config = _load_config(args.config)
    cfg = _pipeline_config(args, config)
    stack = frameio.load_stack(args.stack)
    enhanced = pipeline.enhance_stack(stack, cfg)
    frameio.save_stack(enhanced, Path(args.out), prefix="enhanced",
                       subdir="enhanced", manifest_name="enhanced_manifest.json")
    return 0


def cmd_segment(args) -> int:
    config = _load_config(args.config)
    cfg = _pipeline_config(args, config)
    stack = frameio.load_stack(args.stack)
    seg = pipeline.segment_stack(stack, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    frameio.save_stack(seg.masks, out, prefix="mask",
                       manifest_name="masks_manifest.json")
    frameio.save_stack(seg.segmented, out, prefix="segmented",
                       manifest_name="segmented_manifest.json")
    if cfg.mode == "circle":
        pipeline.write_circles_json(seg.circles, out / "circles.json")
    if seg.frames_segmented == 0:
        print("warning: 0 frames segmented", file=sys.stderr)
    return 0


def cmd_reconstruct(args) -> int:
    config = _load_config(args.config)
    cfg = _pipeline_config(args, config)
    stack = frameio.load_stack(args.stack)
    volume = reconstruct.build_volume(stack, cfg.z_upsample)
    frameio.save_volume(volume, args.out)
    print(f"wrote {volume.nx}x{volume.ny}x{volume.nz} volume to {args.out}")
    return 0


def cmd_render(args) -> int:
    config = _load_config(args.config)
    volume = frameio.load_volume(args.volume)
    mode = _pick(args.mode, config, "render_mode", "mip")
    axis = _pick(args.axis, config, "axis", "z")
    if mode == "mip":
        img = reconstruct.render_mip(volume, axis)
    elif mode == "composite":
        alpha = float(_pick(args.alpha_scale, config, "alpha_scale", 0.1))
        params = reconstruct.RenderParams(axis=axis, mode="composite",
                                          alpha_scale=alpha)
        img = reconstruct.render_composite(volume, params)
    elif mode == "slice":
        if args.index is None:
            raise ValueError("--index is required for slice rendering")
        img = reconstruct.extract_slice(volume, axis, args.index)
    else:
        raise ValueError(f"unknown render mode {mode!r}")
    frameio.write_image(img, args.out)
    return 0


def cmd_evaluate(args) -> int:
    auto = frameio.load_masks(args.auto)
    ref = frameio.load_masks(args.ref)
    indices = _parse_sample_spec(args.sample, len(auto))
    report = ev.mean_iou(auto, ref, indices)
    ev.write_iou_csv(report, args.out_csv)
    if args.circles is not None:
        doc = json.loads(Path(args.circles).read_text())
        circles = [(int(c["frame"]),
                    CircleFit(cx=int(c["cx"]), cy=int(c["cy"]),
                              r=int(c["r"]), votes=int(c["votes"])))
                   for c in doc]
        fit = ev.centerline_fit(circles)
        ev.write_centerline_json(fit, args.out_centerline)
    print(f"{report.mean_iou:.4f}")
    return 0


def cmd_pipeline(args) -> int:
    config = _load_config(args.config)
    cfg = _pipeline_config(args, config)
    stack = frameio.load_stack(args.stack)
    summary = pipeline.run_pipeline(stack, cfg, args.out)
    if "warning" in summary:
        print(f"warning: {summary['warning']}", file=sys.stderr)
    else:
        nx, ny, nz = summary["volume_dims"]
        print(f"segmented {summary['frames_segmented']}/{summary['frames_total']} "
              f"frames; volume {nx}x{ny}x{nz} at {summary['volume']}")
    return 0


def _add_processing_flags(p: argparse.ArgumentParser, hough=True) -> None:
    p.add_argument("--threshold", type=int, default=None,
                   help="binarization threshold (default 49)")
    p.add_argument("--tiles", type=_parse_size, default=None,
                   help="CLAHE tile grid as TXxTY (default 8x8)")
    p.add_argument("--clip-limit", type=float, default=None,
                   help="CLAHE relative clip limit (default 2.0)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for per-frame stages (default 1)")
    p.add_argument("--config", default=None, help="JSON config file")
    if hough:
        p.add_argument("--mode", choices=("circle", "contour"), default=None,
                       help="segmentation mode (default circle)")
        p.add_argument("--r-min", type=int, default=None,
                       help="Hough minimum radius in px (default 5)")
        p.add_argument("--r-max", type=int, default=None,
                       help="Hough maximum radius in px (default min(w,h)/2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sweepvol",
        description="3D ultrasound volume reconstruction from linear-track sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic tube phantom stack")
    p.add_argument("--out", required=True)
    p.add_argument("--frames", type=int, default=150)
    p.add_argument("--size", type=_parse_size, default=None,
                   help="frame size WIDTHxHEIGHT (default 100x128)")
    p.add_argument("--radius-mm", type=float, default=4.0)
    p.add_argument("--slant-deg", type=float, default=5.0)
    p.add_argument("--center", type=_parse_pair, default=None,
                   help="tube center at frame 0 as X,Y px (default frame center)")
    p.add_argument("--interior-mean", type=float, default=150.0)
    p.add_argument("--background-mean", type=float, default=2.0)
    p.add_argument("--speckle-scale", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pixel-spacing", type=_parse_pair, default=None,
                   help="pixel spacing SX,SY in mm (default 0.3,0.3)")
    p.add_argument("--frame-spacing", type=float,
                   default=frameio.DEFAULT_FRAME_SPACING_MM,
                   help="frame spacing in mm (default 0.8)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("enhance", help="enhance every frame of a stack")
    p.add_argument("--stack", required=True, help="stack manifest path")
    p.add_argument("--out", required=True, help="output directory")
    _add_processing_flags(p, hough=False)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("segment", help="segment an enhanced stack")
    p.add_argument("--stack", required=True, help="enhanced stack manifest")
    p.add_argument("--out", required=True, help="output directory")
    _add_processing_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("reconstruct", help="build a volume from a stack")
    p.add_argument("--stack", required=True, help="segmented stack manifest")
    p.add_argument("--out", required=True, help="output .raw path")
    p.add_argument("--z-upsample", type=int, default=None,
                   help="Z upsampling factor (default from spacing)")
    p.add_argument("--config", default=None, help="JSON config file")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("render", help="render a slice or projection")
    p.add_argument("--volume", required=True, help="volume .raw path")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--axis", choices=("x", "y", "z"), default=None)
    p.add_argument("--mode", choices=("mip", "composite", "slice"), default=None)
    p.add_argument("--index", type=int, default=None, help="slice index")
    p.add_argument("--alpha-scale", type=float, default=None)
    p.add_argument("--config", default=None, help="JSON config file")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("evaluate", help="IoU between two mask stacks")
    p.add_argument("--auto", required=True, help="automatic masks manifest")
    p.add_argument("--ref", required=True, help="reference masks manifest")
    p.add_argument("--sample", default="all",
                   help="'all', 'every:N', or comma-separated indices")
    p.add_argument("--out-csv", default="iou.csv")
    p.add_argument("--circles", default=None,
                   help="circles.json from the segment stage; enables "
                        "the centerline fit output")
    p.add_argument("--out-centerline", default="centerline.json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="full enhance/segment/reconstruct/render run")
    p.add_argument("--stack", required=True, help="input stack manifest")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--z-upsample", type=int, default=None)
    p.add_argument("--alpha-scale", type=float, default=None)
    p.add_argument("--dump-steps", action="store_true",
                   help="write per-frame images for all 8 pipeline stages")
    _add_processing_flags(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, pipeline.PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
