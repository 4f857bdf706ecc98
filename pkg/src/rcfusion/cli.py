"""Command-line interface: synth / run / eval / render subcommands."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import FusionError
from .frustum import FrustumMode
from .harness.pipeline import (PipelineConfig, detections_from_dict, run_batch)
from .harness.render import render_bev
from .metrics import evaluate

log = logging.getLogger("rcfusion")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PROCESSING = 4


def _parse_seed_range(text: str) -> range:
    """Parse 'A..B' (inclusive) or a single seed."""
    if ".." in text:
        a, b = text.split("..", 1)
        return range(int(a), int(b) + 1)
    v = int(text)
    return range(v, v + 1)


def _cmd_synth(args) -> int:
    from .harness.synth import SynthConfig, generate_scene
    from .harness.scene import save_scene

    cfg = SynthConfig()
    if args.config:
        cfg = SynthConfig.from_dict(json.loads(Path(args.config).read_text()))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for seed in _parse_seed_range(args.seeds):
        scene = generate_scene(cfg, seed)
        save_scene(scene, out / f"{scene.scene_id}.json")
    log.info("wrote %d scenes to %s", len(_parse_seed_range(args.seeds)), out)
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = PipelineConfig(
        delta=args.delta,
        alpha=args.alpha,
        pillar_dims=tuple(float(v) for v in args.pillar.split(",")),
        mode=FrustumMode(args.mode),
        stride=args.stride,
        use_fusion=not args.no_fusion,
    )
    paths = sorted(Path(args.scenes).glob("*.json"))
    if not paths:
        log.error("no scene files in %s", args.scenes)
        return EXIT_USAGE
    diags = run_batch(paths, cfg, args.out, threads=args.threads)
    matched = sum(d["matched"] for d in diags)
    total = sum(d["num_objects"] for d in diags)
    log.info("processed %d scenes, association rate %.3f",
             len(diags), matched / total if total else 0.0)
    return EXIT_OK


def _cmd_eval(args) -> int:
    from .harness.scene import load_scene

    gt_files = {p.stem: p for p in sorted(Path(args.gt).glob("*.json"))}
    pred_files = {p.stem: p for p in sorted(Path(args.pred).glob("*.json"))}
    common = sorted(gt_files.keys() & pred_files.keys())
    if not common:
        log.error("no overlapping scene ids between %s and %s", args.pred, args.gt)
        return EXIT_USAGE
    pred_scenes = [detections_from_dict(json.loads(pred_files[k].read_text()))
                   for k in common]
    gt_scenes = [load_scene(gt_files[k]).gt_boxes for k in common]
    report = evaluate(pred_scenes, gt_scenes)
    Path(args.out).write_text(report.to_json())
    table = report.to_table()
    Path(args.out).with_suffix(".txt").write_text(table + "\n")
    print(table)
    return EXIT_OK


def _cmd_render(args) -> int:
    from .harness.scene import load_scene

    scene = load_scene(args.scene)
    detections = []
    if args.pred:
        detections = detections_from_dict(json.loads(Path(args.pred).read_text()))
    render_bev(scene, detections, args.out)
    log.info("wrote %s", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcfusion",
                                     description="Radar-camera fusion geometry engine")
    parser.add_argument("--log-level", default="info",
                        choices=["debug", "info", "warning", "error"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic scenes")
    p.add_argument("--config", help="JSON file of SynthConfig overrides")
    p.add_argument("--seeds", required=True, help="seed or inclusive range A..B")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("run", help="run the fusion pipeline over scenes")
    p.add_argument("--scenes", required=True, help="directory of scene JSON files")
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--pillar", default="0.2,0.2,1.5")
    p.add_argument("--mode", default="test", choices=["train", "test"])
    p.add_argument("--stride", type=float, default=4.0)
    p.add_argument("--no-fusion", action="store_true",
                   help="decode primary heads only (no radar)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("eval", help="evaluate detections against scene GT")
    p.add_argument("--pred", required=True, help="directory of detection JSON files")
    p.add_argument("--gt", required=True, help="directory of scene JSON files")
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("render", help="render a BEV image")
    p.add_argument("--scene", required=True)
    p.add_argument("--pred", help="detection JSON for the scene")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FusionError as err:
        log.error("processing failed: %s", err)
        return EXIT_PROCESSING
    except OSError as err:
        log.error("I/O failure: %s", err)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
