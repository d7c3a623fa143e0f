"""Domain types shared by the whole engine, plus elementary box geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

SCORE_EPS = 1e-4

# Per-frame provenance of a trajectory box.
SOURCE_DETECTED = "detected"
SOURCE_INTERPOLATED = "interpolated"
SOURCE_EXTRAPOLATED = "extrapolated"
SOURCE_SUPERVISED = "supervised"
SOURCES = (SOURCE_DETECTED, SOURCE_INTERPOLATED, SOURCE_EXTRAPOLATED, SOURCE_SUPERVISED)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box: top-left corner (x, y), width w, height h, in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box size must be positive, got w={self.w} h={self.h}")
        if not all(math.isfinite(v) for v in (self.x, self.y, self.w, self.h)):
            raise ValueError("box coordinates must be finite")

    @property
    def cx(self) -> float:
        return self.x + self.w / 2.0

    @property
    def cy(self) -> float:
        return self.y + self.h / 2.0


@dataclass(frozen=True)
class Detection:
    """A scored box at one frame, the atomic unit linked into trajectories.

    Scores are kept strictly inside (0, 1) so the confidence cost
    log((1-s)/s) stays finite; out-of-range inputs are clamped at
    construction via `clamp_score`.
    """

    id: str
    frame: int
    box: Box
    score: float

    def __post_init__(self):
        if self.frame < 0:
            raise ValueError(f"detection frame must be >= 0, got {self.frame}")
        if not (0.0 < self.score < 1.0):
            raise ValueError(f"detection score must lie in (0,1), got {self.score}")


def clamp_score(s: float) -> float:
    """Clamp a raw detector score into [SCORE_EPS, 1-SCORE_EPS]."""
    return min(max(s, SCORE_EPS), 1.0 - SCORE_EPS)


@dataclass(frozen=True)
class PathAnnotation:
    """Per-frame cursor samples loosely following one object.

    samples maps frame -> (px, py) and must cover a contiguous frame range.
    """

    path_id: str
    samples: dict[int, tuple[float, float]]

    def __post_init__(self):
        if not self.samples:
            raise ValueError(f"path {self.path_id} has no samples")
        frames = sorted(self.samples)
        if frames[-1] - frames[0] + 1 != len(frames):
            raise ValueError(f"path {self.path_id} samples are not contiguous")

    @property
    def first_frame(self) -> int:
        return min(self.samples)

    @property
    def last_frame(self) -> int:
        return max(self.samples)

    @property
    def span_len(self) -> int:
        return self.last_frame - self.first_frame + 1


@dataclass(frozen=True)
class PointTrack:
    """A point tracked over consecutive frames (an optical-flow trajectory)."""

    track_id: str
    start_frame: int
    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError(f"track {self.track_id} has no points")

    @property
    def end_frame(self) -> int:
        return self.start_frame + len(self.points) - 1

    def position_at(self, frame: int) -> tuple[float, float] | None:
        """Point position at `frame`, or None outside the track's lifespan."""
        if frame < self.start_frame or frame > self.end_frame:
            return None
        return self.points[frame - self.start_frame]


@dataclass(frozen=True)
class BoxAnnotation:
    """A human-drawn exact box for one path at one frame."""

    path_id: str
    frame: int
    box: Box


@dataclass
class Trajectory:
    """Dense per-frame boxes for one object with per-frame provenance.

    entries maps frame -> (box, source); engine outputs cover the
    contiguous span of the source path annotation, one box per frame.
    """

    path_id: str
    entries: dict[int, tuple[Box, str]] = field(default_factory=dict)

    def frames(self) -> list[int]:
        return sorted(self.entries)

    @property
    def first_frame(self) -> int:
        return min(self.entries)

    @property
    def last_frame(self) -> int:
        return max(self.entries)

    def is_contiguous(self) -> bool:
        if not self.entries:
            return False
        return self.last_frame - self.first_frame + 1 == len(self.entries)


@dataclass(frozen=True)
class EngineConfig:
    """Engine tunables. fps converts the second-based knobs into frames."""

    fps: float
    window_seconds: float = 4.0
    box_removal_seconds: float = 0.5
    affinity_floor: float = 1e-6
    separation_cap: float = 30.0
    max_label_sweeps: int = 10
    st_attach_seconds: float = 0.5

    def __post_init__(self):
        for name in ("fps", "window_seconds", "box_removal_seconds",
                     "affinity_floor", "separation_cap", "st_attach_seconds"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_label_sweeps <= 0:
            raise ValueError("max_label_sweeps must be positive")
        if self.affinity_floor >= 1:
            raise ValueError("affinity_floor must be < 1")

    @property
    def window_frames(self) -> int:
        return round(self.window_seconds * self.fps)

    @property
    def st_attach_frames(self) -> int:
        return round(self.st_attach_seconds * self.fps)

    @property
    def box_removal_frames(self) -> float:
        # kept fractional; removal uses a strict |df| < threshold comparison
        return self.box_removal_seconds * self.fps


def box_iou(a: Box, b: Box) -> float:
    """Intersection-over-union of two boxes, in [0, 1]."""
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = a.w * a.h + b.w * b.h - inter
    return inter / union


def contains(b: Box, p: tuple[float, float]) -> bool:
    """True iff p lies inside b, boundary included."""
    px, py = p
    return b.x <= px <= b.x + b.w and b.y <= py <= b.y + b.h


def lerp_box(a: Box, b: Box, t: float) -> Box:
    """Interpolate component-wise linearly in (center, size); t=0 -> a, t=1 -> b."""
    cx = a.cx + (b.cx - a.cx) * t
    cy = a.cy + (b.cy - a.cy) * t
    w = a.w + (b.w - a.w) * t
    h = a.h + (b.h - a.h) * t
    return Box(cx - w / 2.0, cy - h / 2.0, w, h)
