"""Turn linked detection paths and box supervision into dense trajectories.

Anchors (chosen detections and supervised boxes) are joined by linear
interpolation in (center, size); the remainder of the path's span is
filled by carrying the nearest anchor's size along the cursor path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .linkage import LinkedPath
from .model import (
    Box,
    BoxAnnotation,
    Detection,
    EngineConfig,
    PathAnnotation,
    Trajectory,
    SOURCE_DETECTED,
    SOURCE_EXTRAPOLATED,
    SOURCE_INTERPOLATED,
    SOURCE_SUPERVISED,
    lerp_box,
)

# An anchor is a frame-pinned box with its provenance tag.
Anchor = tuple[int, Box, str]


@dataclass
class BuildReport:
    """What happened while building trajectories for a scenario."""

    failures: list[str] = field(default_factory=list)   # path ids with nothing to anchor
    fallbacks: list[str] = field(default_factory=list)  # paths built from boxes alone
    mean_anchor_gap_s: dict[str, float] = field(default_factory=dict)


def interpolate(linked: LinkedPath, detections: dict[str, Detection]) -> Trajectory:
    """Dense boxes between the chosen detections of one linked path."""
    anchors = [
        (detections[i].frame, detections[i].box, SOURCE_DETECTED) for i in linked.chosen
    ]
    if not anchors:
        raise ValueError(f"linked path {linked.path_id} has no detections")
    traj = Trajectory(path_id=linked.path_id)
    _fill_between(traj, anchors)
    return traj


def _fill_between(traj: Trajectory, anchors: list[Anchor]) -> None:
    anchors = sorted(anchors, key=lambda a: a[0])
    for frame, box, source in anchors:
        traj.entries[frame] = (box, source)
    for (f0, b0, _), (f1, b1, _) in zip(anchors, anchors[1:]):
        for f in range(f0 + 1, f1):
            t = (f - f0) / (f1 - f0)
            traj.entries[f] = (lerp_box(b0, b1, t), SOURCE_INTERPOLATED)


def extend_to_span(traj: Trajectory, path: PathAnnotation) -> Trajectory:
    """Fill the path span outside the anchored range.

    The nearest anchor lends its box size and its cursor-to-center offset;
    each missing frame re-centers that box on the frame's cursor sample.
    """
    if not traj.entries:
        raise ValueError(f"trajectory {traj.path_id} has no anchors to extend")
    first, last = traj.first_frame, traj.last_frame
    for frame in range(path.first_frame, path.last_frame + 1):
        if first <= frame <= last:
            continue
        ref = first if frame < first else last
        box, _ = traj.entries[ref]
        ref_sample = path.samples.get(ref)
        sample = path.samples.get(frame)
        if ref_sample is None or sample is None:
            # anchor sits outside the path span; hold the box still
            traj.entries[frame] = (box, SOURCE_EXTRAPOLATED)
            continue
        off_x = box.cx - ref_sample[0]
        off_y = box.cy - ref_sample[1]
        cx = sample[0] + off_x
        cy = sample[1] + off_y
        traj.entries[frame] = (
            Box(cx - box.w / 2.0, cy - box.h / 2.0, box.w, box.h),
            SOURCE_EXTRAPOLATED,
        )
    return traj


def apply_box_supervision(
    linked: LinkedPath,
    detections: dict[str, Detection],
    boxes: list[BoxAnnotation],
    path: PathAnnotation,
    config: EngineConfig,
) -> Trajectory:
    """Insert annotated boxes as mandatory anchors and rebuild the trajectory.

    Chosen detections closer than the removal window to any annotated box
    are dropped; the result is deterministic and idempotent for a fixed
    box set.
    """
    seen_frames = set()
    for b in boxes:
        if b.frame in seen_frames:
            raise ValueError(
                f"path {b.path_id}: two supervised boxes at frame {b.frame}"
            )
        seen_frames.add(b.frame)
    removal = config.box_removal_frames
    anchors: list[Anchor] = [(b.frame, b.box, SOURCE_SUPERVISED) for b in boxes]
    for det_id in linked.chosen:
        d = detections[det_id]
        if any(abs(d.frame - f) < removal for f in seen_frames):
            continue
        anchors.append((d.frame, d.box, SOURCE_DETECTED))
    traj = Trajectory(path_id=linked.path_id)
    _fill_between(traj, anchors)
    return extend_to_span(traj, path)


def build_trajectory(
    path: PathAnnotation,
    linked: LinkedPath | None,
    detections: dict[str, Detection],
    boxes: list[BoxAnnotation],
    config: EngineConfig,
) -> Trajectory | None:
    """One path's dense trajectory, or None when there is nothing to anchor."""
    if linked is not None and linked.chosen:
        return apply_box_supervision(linked, detections, boxes, path, config)
    if boxes:
        empty = LinkedPath(path_id=path.path_id)
        return apply_box_supervision(empty, detections, boxes, path, config)
    return None


def build_all(
    paths: list[PathAnnotation],
    linked_paths: dict[str, LinkedPath],
    detections: dict[str, Detection],
    boxes: list[BoxAnnotation],
    config: EngineConfig,
) -> tuple[list[Trajectory], BuildReport]:
    """One trajectory per path annotation; failures reported, not raised."""
    by_path: dict[str, list[BoxAnnotation]] = {}
    for b in boxes:
        by_path.setdefault(b.path_id, []).append(b)
    report = BuildReport()
    out = []
    for path in sorted(paths, key=lambda p: p.path_id):
        linked = linked_paths.get(path.path_id)
        path_boxes = by_path.get(path.path_id, [])
        traj = build_trajectory(path, linked, detections, path_boxes, config)
        if traj is None:
            report.failures.append(path.path_id)
            continue
        if (linked is None or not linked.chosen) and path_boxes:
            report.fallbacks.append(path.path_id)
        anchor_frames = sorted(
            f for f, (_, src) in traj.entries.items()
            if src in (SOURCE_DETECTED, SOURCE_SUPERVISED)
        )
        if len(anchor_frames) > 1:
            gaps = [b - a for a, b in zip(anchor_frames, anchor_frames[1:])]
            report.mean_anchor_gap_s[path.path_id] = (
                sum(gaps) / len(gaps) / config.fps
            )
        out.append(traj)
    return out, report
