"""Command-line entry points: infer, eval, simulate, curve, serve."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import io as record_io
from .evaluation import (
    TimeModel,
    annotation_time,
    efficiency_curve,
    recall_at_iou,
    write_curve_csv,
)
from .pipeline import run_pipeline
from .synth import SynthConfig, generate_scenario, Scenario


def _read_or_fail(kind: str, path: str, flag: str):
    if not os.path.exists(path):
        sys.exit(f"error: {flag} file not found: {path}")
    try:
        return record_io.read_file(kind, path)
    except (record_io.RecordError, ValueError) as e:
        sys.exit(f"error: {flag} ({path}): {e}")


def cmd_infer(args) -> int:
    config = record_io.load_engine_config(args.config)
    detections = _read_or_fail("detections", args.detections, "--detections")
    paths = _read_or_fail("paths", args.paths, "--paths")
    tracks = _read_or_fail("tracks", args.tracks, "--tracks")
    boxes = _read_or_fail("boxes", args.boxes, "--boxes") if args.boxes else []
    try:
        trajectories, report = run_pipeline(
            detections, paths, tracks, boxes, config, jobs=args.jobs
        )
    except ValueError as e:
        sys.exit(f"error: {e}")
    record_io.write_file("trajectories", args.out, trajectories)
    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        with open(args.report, "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
    for line in report.warnings:
        print(f"warning: {line}", file=sys.stderr)
    for pid in report.failures:
        print(f"warning: no anchors for path '{pid}'; no trajectory produced",
              file=sys.stderr)
    print(f"wrote {len(trajectories)} trajectories to {args.out}")
    return 0


def cmd_eval(args) -> int:
    pred = _read_or_fail("trajectories", args.pred, "--pred")
    gt = _read_or_fail("gt", args.gt, "--gt")
    thresholds = [float(t) for t in args.iou.split(",") if t]
    report = recall_at_iou(pred, gt, thresholds)
    if args.time_model:
        fps, video_s, n_boxes = (float(v) for v in args.time_model.split(","))
        paths = _read_or_fail("paths", args.paths, "--paths") if args.paths else []
        report.total_annotation_time_s = annotation_time(
            paths, int(n_boxes), video_s, fps
        )
    for t in thresholds:
        print(f"recall@{t}: {report.recall[t]:.4f}")
    if report.total_annotation_time_s is not None:
        print(f"annotation_time_s: {report.total_annotation_time_s:.1f}")
    for line in report.id_mismatches:
        print(f"warning: {line}", file=sys.stderr)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
    return 0


def _load_synth_config(path: str) -> SynthConfig:
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    section = raw.get("synth", raw)
    known = {}
    for fld in dataclasses.fields(SynthConfig):
        if fld.name in section:
            v = section[fld.name]
            known[fld.name] = tuple(v) if isinstance(v, list) else v
    return SynthConfig(**known)


def cmd_simulate(args) -> int:
    if args.config:
        cfg = _load_synth_config(args.config)
    else:
        cfg = SynthConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    scenario = generate_scenario(cfg)
    scenario.write_dir(args.out_dir)
    print(f"wrote scenario ({cfg.n_objects} objects, {cfg.n_frames} frames) "
          f"to {args.out_dir}")
    return 0


def _load_scenario_dir(d: str) -> Scenario:
    root = Path(d)
    cfg = _load_synth_config(root / "config.json")
    return Scenario(
        config=cfg,
        ground_truth=record_io.read_file("gt", root / "gt.jsonl"),
        detections=record_io.read_file("detections", root / "detections.jsonl"),
        tracks=record_io.read_file("tracks", root / "tracks.jsonl"),
        paths=record_io.read_file("paths", root / "paths.jsonl"),
        boxes=record_io.read_file("boxes", root / "boxes.jsonl"),
    )


def cmd_curve(args) -> int:
    scenario = _load_scenario_dir(args.scenario)
    config = record_io.load_engine_config(
        args.config if args.config else Path(args.scenario) / "config.json"
    )
    budgets = [int(b) for b in args.budgets.split(",") if b]
    thresholds = [float(t) for t in args.iou.split(",") if t]
    points = efficiency_curve(
        scenario, budgets, config, thresholds=thresholds, jobs=args.jobs
    )
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        write_curve_csv(f, points)
    for p in points:
        cells = " ".join(f"recall@{t}={p.recall[t]:.4f}" for t in thresholds)
        print(f"budget={p.budget} time_s={p.time_s:.1f} {cells}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(args.root)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pathlink",
        description="Dense box trajectories from cursor paths, detections, "
                    "and point tracks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="run the two-stage pipeline")
    p.add_argument("--detections", required=True)
    p.add_argument("--paths", required=True)
    p.add_argument("--tracks", required=True)
    p.add_argument("--boxes")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="recall of ground-truth boxes at IoU thresholds")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--iou", default="0.5,0.7")
    p.add_argument("--paths")
    p.add_argument("--time-model", dest="time_model",
                   help="fps,video_seconds,n_boxes for the effort model")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="generate a synthetic scenario")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("curve", help="accuracy-versus-budget curve on a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--budgets", default="0,1,3,10")
    p.add_argument("--iou", default="0.5")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("serve", help="run the annotation session server")
    p.add_argument("--root", required=True, help="directory holding sessions")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
