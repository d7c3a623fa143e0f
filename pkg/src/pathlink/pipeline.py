"""End-to-end inference: affinity graph, prelabeling, linkage, building."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .affinity import build_affinity_graph
from .builder import build_all
from .linkage import LinkedPath, link_cluster
from .model import (
    BoxAnnotation,
    Detection,
    EngineConfig,
    PathAnnotation,
    Trajectory,
)
from .prelabel import solve_prelabel


@dataclass
class RunReport:
    n_detections: int = 0
    n_pruned: int = 0
    prelabel_energy: float = 0.0
    cluster_sizes: dict[str, int] = field(default_factory=dict)
    linkage_costs: dict[str, float] = field(default_factory=dict)
    chosen_counts: dict[str, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)
    fallbacks: list[str] = field(default_factory=list)
    mean_anchor_gap_s: dict[str, float] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_detections": self.n_detections,
            "n_pruned": self.n_pruned,
            "prelabel_energy": self.prelabel_energy,
            "cluster_sizes": dict(sorted(self.cluster_sizes.items())),
            "linkage_costs": dict(sorted(self.linkage_costs.items())),
            "chosen_counts": dict(sorted(self.chosen_counts.items())),
            "warnings": list(self.warnings),
            "failures": list(self.failures),
            "fallbacks": list(self.fallbacks),
            "mean_anchor_gap_s": dict(sorted(self.mean_anchor_gap_s.items())),
            "timings": dict(self.timings),
        }


def validate_boxes(boxes: list[BoxAnnotation], paths: list[PathAnnotation]) -> None:
    """Supervised boxes must reference a known path and a frame in its span."""
    spans = {p.path_id: (p.first_frame, p.last_frame) for p in paths}
    for b in boxes:
        span = spans.get(b.path_id)
        if span is None:
            raise ValueError(f"box annotation references unknown path '{b.path_id}'")
        if not span[0] <= b.frame <= span[1]:
            raise ValueError(
                f"box annotation for path '{b.path_id}' at frame {b.frame} "
                f"lies outside the path span [{span[0]}, {span[1]}]"
            )


def run_pipeline(
    detections: list[Detection],
    paths: list[PathAnnotation],
    tracks,
    boxes: list[BoxAnnotation],
    config: EngineConfig,
    jobs: int = 1,
) -> tuple[list[Trajectory], RunReport]:
    validate_boxes(boxes, paths)
    report = RunReport(n_detections=len(detections))
    t0 = time.perf_counter()
    graph = build_affinity_graph(detections, tracks, config)
    t1 = time.perf_counter()
    assignment = solve_prelabel(detections, paths, graph, config)
    t2 = time.perf_counter()
    report.n_pruned = len(assignment.pruned)
    report.prelabel_energy = assignment.energy

    by_id = {d.id: d for d in detections}
    clusters: dict[str, list[Detection]] = {p.path_id: [] for p in paths}
    for det_id, pid in assignment.labels.items():
        clusters[pid].append(by_id[det_id])
    for pid, dets in clusters.items():
        report.cluster_sizes[pid] = len(dets)

    def solve(pid: str) -> tuple[str, LinkedPath | None, list[str]]:
        dets = clusters[pid]
        if not dets:
            return pid, None, []
        linked, warnings = link_cluster(pid, dets, graph, config)
        return pid, linked, warnings

    pids = sorted(clusters)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(solve, pids))
    else:
        results = [solve(pid) for pid in pids]
    linked_paths: dict[str, LinkedPath] = {}
    for pid, linked, warnings in results:
        report.warnings.extend(warnings)
        if linked is not None:
            linked_paths[pid] = linked
            report.linkage_costs[pid] = linked.total_cost
            report.chosen_counts[pid] = len(linked.chosen)
    t3 = time.perf_counter()

    trajectories, build_report = build_all(paths, linked_paths, by_id, boxes, config)
    t4 = time.perf_counter()
    report.failures = build_report.failures
    report.fallbacks = build_report.fallbacks
    report.mean_anchor_gap_s = build_report.mean_anchor_gap_s
    report.timings = {
        "affinity_s": t1 - t0,
        "prelabel_s": t2 - t1,
        "linkage_s": t3 - t2,
        "build_s": t4 - t3,
    }
    return trajectories, report
