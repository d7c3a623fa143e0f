"""Pairwise detection affinities from shared point tracks.

The affinity between two detections is the set-IoU of the track ids
passing through each box at its frame. The sparse graph built here feeds
both the prelabeling energy and the linkage transition costs.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .model import Detection, EngineConfig, PointTrack, box_iou, contains


@dataclass
class AffinityGraph:
    """Sparse affinities a_ij in (0, 1] between detections within the window.

    Edges are stored once per pair, keyed in canonical order: ascending
    frame, ties by detection id.
    """

    window_frames: int
    edges: dict[tuple[str, str], float] = field(default_factory=dict)

    def get(self, id_i: str, id_j: str) -> float | None:
        a = self.edges.get((id_i, id_j))
        if a is None:
            a = self.edges.get((id_j, id_i))
        return a


def canonical_pair(d_i: Detection, d_j: Detection) -> tuple[str, str]:
    if (d_i.frame, d_i.id) <= (d_j.frame, d_j.id):
        return d_i.id, d_j.id
    return d_j.id, d_i.id


def tracks_through(d: Detection, tracks: Iterable[PointTrack]) -> set[str]:
    """Ids of tracks with a position at d.frame lying inside d.box."""
    hits = set()
    for t in tracks:
        p = t.position_at(d.frame)
        if p is not None and contains(d.box, p):
            hits.add(t.track_id)
    return hits


def of_affinity(d_i: Detection, d_j: Detection, tracks: Iterable[PointTrack]) -> float:
    """Set-IoU of the tracks passing through each detection; 0 if both sets empty."""
    if d_i.frame == d_j.frame:
        raise ValueError("affinity is defined only across frames")
    tracks = list(tracks)
    s_i = tracks_through(d_i, tracks)
    s_j = tracks_through(d_j, tracks)
    union = len(s_i | s_j)
    if union == 0:
        return 0.0
    return len(s_i & s_j) / union


def fallback_affinity(d_i: Detection, d_j: Detection, fps: float) -> float:
    """Motion affinity used when no tracks are shared: box IoU decayed over time."""
    if d_i.frame == d_j.frame:
        raise ValueError("affinity is defined only across frames")
    iou = box_iou(d_i.box, d_j.box)
    if iou == 0.0:
        return 0.0
    return iou * math.exp(-abs(d_i.frame - d_j.frame) / fps)


def build_affinity_graph(
    detections: Iterable[Detection],
    tracks: Iterable[PointTrack],
    config: EngineConfig,
) -> AffinityGraph:
    """Edges for every pair within the temporal window with positive track overlap.

    Pairs sharing no tracks get no edge here; linkage falls back to
    `fallback_affinity` on demand.
    """
    detections = list(detections)
    tracks = list(tracks)
    window = config.window_frames
    graph = AffinityGraph(window_frames=window)
    if not detections or not tracks:
        return graph

    # Membership sets via a frame index over live tracks.
    by_frame: dict[int, list[Detection]] = defaultdict(list)
    for d in detections:
        by_frame[d.frame].append(d)
    track_hits: dict[str, list[Detection]] = defaultdict(list)
    set_sizes: dict[str, int] = defaultdict(int)
    for t in tracks:
        for frame in range(t.start_frame, t.end_frame + 1):
            dets = by_frame.get(frame)
            if not dets:
                continue
            p = t.points[frame - t.start_frame]
            for d in dets:
                if contains(d.box, p):
                    track_hits[t.track_id].append(d)
                    set_sizes[d.id] += 1

    # Count shared tracks per pair by co-occurrence within each track's hit list.
    shared: dict[tuple[str, str], int] = defaultdict(int)
    for hits in track_hits.values():
        hits.sort(key=lambda d: (d.frame, d.id))
        for a in range(len(hits)):
            d_a = hits[a]
            for b in range(a + 1, len(hits)):
                d_b = hits[b]
                gap = d_b.frame - d_a.frame
                if gap == 0:
                    continue
                if gap > window:
                    break
                shared[canonical_pair(d_a, d_b)] += 1

    for (id_i, id_j), inter in sorted(shared.items()):
        union = set_sizes[id_i] + set_sizes[id_j] - inter
        graph.edges[(id_i, id_j)] = inter / union
    return graph
