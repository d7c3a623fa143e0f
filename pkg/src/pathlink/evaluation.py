"""Annotation-quality evaluation: recall versus IoU threshold, the
annotation-time cost model, and accuracy-versus-budget curves."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

from .model import BoxAnnotation, EngineConfig, PathAnnotation, Trajectory, box_iou
from .pipeline import run_pipeline
from .synth import Scenario, uniform_frames


@dataclass(frozen=True)
class TimeModel:
    """Constants of the annotation-effort model."""

    seconds_per_box: float = 5.2
    path_slowdown: float = 0.33   # paths are recorded this much slower than realtime


@dataclass
class EvalReport:
    recall: dict[float, float] = field(default_factory=dict)
    per_trajectory: dict[str, dict[float, float]] = field(default_factory=dict)
    total_gt_boxes: int = 0
    id_mismatches: list[str] = field(default_factory=list)
    total_annotation_time_s: float | None = None
    budget: dict | None = None

    def to_dict(self) -> dict:
        return {
            "recall": {str(t): r for t, r in sorted(self.recall.items())},
            "per_trajectory": {
                pid: {str(t): r for t, r in sorted(rs.items())}
                for pid, rs in sorted(self.per_trajectory.items())
            },
            "total_gt_boxes": self.total_gt_boxes,
            "id_mismatches": list(self.id_mismatches),
            "total_annotation_time_s": self.total_annotation_time_s,
            "budget": self.budget,
        }


def recall_at_iou(
    pred: Iterable[Trajectory],
    gt: Iterable[Trajectory],
    thresholds: Sequence[float],
) -> EvalReport:
    """Fraction of ground-truth boxes matched by the same-id prediction.

    Correspondence is by path id: this scores annotation quality, not
    tracker association.
    """
    pred_by_id = {t.path_id: t for t in pred}
    gt_by_id = {t.path_id: t for t in gt}
    report = EvalReport()
    for pid in sorted(set(pred_by_id) ^ set(gt_by_id)):
        side = "prediction" if pid in pred_by_id else "ground truth"
        report.id_mismatches.append(f"path '{pid}' only in {side}")
    hits = {t: 0 for t in thresholds}
    total = 0
    for pid in sorted(gt_by_id):
        g = gt_by_id[pid]
        p = pred_by_id.get(pid)
        per = {t: 0 for t in thresholds}
        for frame, (gbox, _) in g.entries.items():
            total += 1
            if p is None or frame not in p.entries:
                continue
            iou = box_iou(p.entries[frame][0], gbox)
            for t in thresholds:
                if iou >= t:
                    hits[t] += 1
                    per[t] += 1
        n = len(g.entries)
        report.per_trajectory[pid] = {t: per[t] / n for t in thresholds}
    report.total_gt_boxes = total
    report.recall = {t: (hits[t] / total if total else 0.0) for t in thresholds}
    return report


def annotation_time(
    paths: Iterable[PathAnnotation],
    boxes,
    video_duration_s: float,
    fps: float,
    model: TimeModel = TimeModel(),
) -> float:
    """Modeled effort: one watch of the video, each path followed at a
    slowed-down playback, and a fixed cost per annotated box."""
    n_boxes = boxes if isinstance(boxes, int) else len(list(boxes))
    path_time = sum(p.span_len / fps for p in paths) * (1.0 + model.path_slowdown)
    return video_duration_s + path_time + model.seconds_per_box * n_boxes


def budget_boxes(gt: Iterable[Trajectory], budget: int) -> list[BoxAnnotation]:
    """`budget` ground-truth boxes per trajectory, spread uniformly in time."""
    out = []
    for traj in sorted(gt, key=lambda t: t.path_id):
        for f in uniform_frames(traj.first_frame, traj.last_frame, budget):
            out.append(BoxAnnotation(path_id=traj.path_id, frame=f,
                                     box=traj.entries[f][0]))
    return out


@dataclass
class CurvePoint:
    budget: int
    time_s: float
    recall: dict[float, float]


def efficiency_curve(
    scenario: Scenario,
    budgets: Sequence[int],
    config: EngineConfig,
    thresholds: Sequence[float] = (0.5,),
    time_model: TimeModel = TimeModel(),
    jobs: int = 1,
) -> list[CurvePoint]:
    """Run the pipeline once per box budget and score each result."""
    video_s = scenario.config.n_frames / scenario.config.fps
    points = []
    for budget in budgets:
        boxes = budget_boxes(scenario.ground_truth, budget)
        trajectories, _ = run_pipeline(
            scenario.detections, scenario.paths, scenario.tracks, boxes, config,
            jobs=jobs,
        )
        report = recall_at_iou(trajectories, scenario.ground_truth, thresholds)
        time_s = annotation_time(
            scenario.paths, len(boxes), video_s, scenario.config.fps, time_model
        )
        points.append(CurvePoint(budget=budget, time_s=time_s, recall=report.recall))
    return points


def boxes_only_trajectories(
    gt: Iterable[Trajectory], budget: int
) -> list[Trajectory]:
    """Keyframe-interpolation baseline: no paths, no detections, just
    `budget` uniform boxes per trajectory joined linearly."""
    from .builder import _fill_between
    from .model import SOURCE_SUPERVISED

    out = []
    for traj in sorted(gt, key=lambda t: t.path_id):
        frames = uniform_frames(traj.first_frame, traj.last_frame, budget)
        if not frames:
            continue
        anchors = [(f, traj.entries[f][0], SOURCE_SUPERVISED) for f in frames]
        built = Trajectory(path_id=traj.path_id)
        _fill_between(built, anchors)
        out.append(built)
    return out


def boxes_only_curve(
    gt: list[Trajectory],
    budgets: Sequence[int],
    video_duration_s: float,
    thresholds: Sequence[float] = (0.5,),
    time_model: TimeModel = TimeModel(),
) -> list[CurvePoint]:
    points = []
    for budget in budgets:
        pred = boxes_only_trajectories(gt, budget)
        report = recall_at_iou(pred, gt, thresholds)
        n_boxes = budget * len(gt)
        time_s = annotation_time([], n_boxes, video_duration_s, fps=1.0,
                                 model=time_model)
        points.append(CurvePoint(budget=budget, time_s=time_s, recall=report.recall))
    return points


def write_curve_csv(f: TextIO, points: list[CurvePoint]) -> None:
    thresholds = sorted({t for p in points for t in p.recall})
    writer = csv.writer(f)
    writer.writerow(["budget", "time_s"] + [f"recall@{t}" for t in thresholds])
    for p in points:
        writer.writerow([p.budget, f"{p.time_s:.3f}"]
                        + [f"{p.recall.get(t, 0.0):.6f}" for t in thresholds])


def write_report_json(f: TextIO, report: EvalReport) -> None:
    json.dump(report.to_dict(), f, indent=2, sort_keys=True)
    f.write("\n")
