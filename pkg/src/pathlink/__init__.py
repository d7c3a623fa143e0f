"""pathlink: dense box trajectories from cursor-path annotations,
object detections, and optical-flow point tracks."""

from .model import (
    Box,
    BoxAnnotation,
    Detection,
    EngineConfig,
    PathAnnotation,
    PointTrack,
    Trajectory,
    box_iou,
    contains,
    lerp_box,
)
from .affinity import AffinityGraph, build_affinity_graph
from .prelabel import LabelAssignment, solve_prelabel
from .linkage import LinkedPath, link_cluster
from .pipeline import RunReport, run_pipeline
from .synth import Scenario, SynthConfig, generate_scenario
from .evaluation import EvalReport, TimeModel, annotation_time, recall_at_iou

__version__ = "0.1.0"

__all__ = [
    "AffinityGraph",
    "Box",
    "BoxAnnotation",
    "Detection",
    "EngineConfig",
    "EvalReport",
    "LabelAssignment",
    "LinkedPath",
    "PathAnnotation",
    "PointTrack",
    "RunReport",
    "Scenario",
    "SynthConfig",
    "TimeModel",
    "Trajectory",
    "annotation_time",
    "box_iou",
    "build_affinity_graph",
    "contains",
    "generate_scenario",
    "lerp_box",
    "link_cluster",
    "recall_at_iou",
    "run_pipeline",
    "solve_prelabel",
]
