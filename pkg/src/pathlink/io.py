"""JSON Lines readers and writers for every record kind the engine exchanges.

One record per line, streamable and diff-able. Readers validate and report
the offending line number and field; writers emit records in a canonical
order so identical inputs serialize byte-identically.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, TextIO

from .model import (
    Box,
    BoxAnnotation,
    Detection,
    EngineConfig,
    PathAnnotation,
    PointTrack,
    Trajectory,
    SOURCES,
    clamp_score,
)


class RecordError(ValueError):
    """A malformed line; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _parse_line(line: str, line_no: int, fields: tuple[str, ...]) -> dict:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as e:
        raise RecordError(line_no, f"malformed JSON ({e.msg})") from e
    if not isinstance(rec, dict):
        raise RecordError(line_no, "record must be a JSON object")
    for f in fields:
        if f not in rec:
            raise RecordError(line_no, f"missing field '{f}'")
    return rec


def _number(rec: dict, key: str, line_no: int) -> float:
    v = rec[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise RecordError(line_no, f"field '{key}' must be a finite number")
    return float(v)


def _frame(rec: dict, line_no: int, key: str = "frame") -> int:
    v = rec[key]
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise RecordError(line_no, f"field '{key}' must be a non-negative integer")
    return v


def _box(rec: dict, line_no: int) -> Box:
    x = _number(rec, "x", line_no)
    y = _number(rec, "y", line_no)
    w = _number(rec, "w", line_no)
    h = _number(rec, "h", line_no)
    if w <= 0 or h <= 0:
        raise RecordError(line_no, f"fields 'w'/'h' must be positive, got w={w} h={h}")
    return Box(x, y, w, h)


def _lines(f: TextIO) -> Iterable[tuple[int, str]]:
    for line_no, line in enumerate(f, start=1):
        line = line.strip()
        if line:
            yield line_no, line


# --- detections -------------------------------------------------------------

def read_detections(f: TextIO) -> list[Detection]:
    out = []
    seen = set()
    for line_no, line in _lines(f):
        rec = _parse_line(line, line_no, ("id", "frame", "x", "y", "w", "h", "score"))
        score = _number(rec, "score", line_no)
        if not 0.0 <= score <= 1.0:
            raise RecordError(line_no, f"field 'score' must lie in [0,1], got {score}")
        det_id = str(rec["id"])
        if det_id in seen:
            raise RecordError(line_no, f"duplicate detection id '{det_id}'")
        seen.add(det_id)
        out.append(
            Detection(
                id=det_id,
                frame=_frame(rec, line_no),
                box=_box(rec, line_no),
                score=clamp_score(score),
            )
        )
    return out


def write_detections(f: TextIO, detections: Iterable[Detection]) -> None:
    for d in sorted(detections, key=lambda d: (d.frame, d.id)):
        f.write(json.dumps({
            "id": d.id, "frame": d.frame,
            "x": d.box.x, "y": d.box.y, "w": d.box.w, "h": d.box.h,
            "score": d.score,
        }) + "\n")


# --- paths ------------------------------------------------------------------

def read_paths(f: TextIO) -> list[PathAnnotation]:
    samples: dict[str, dict[int, tuple[float, float]]] = {}
    line_of: dict[tuple[str, int], int] = {}
    for line_no, line in _lines(f):
        rec = _parse_line(line, line_no, ("path_id", "frame", "px", "py"))
        pid = str(rec["path_id"])
        frame = _frame(rec, line_no)
        if (pid, frame) in line_of:
            raise RecordError(line_no, f"duplicate sample for path '{pid}' frame {frame}")
        line_of[(pid, frame)] = line_no
        samples.setdefault(pid, {})[frame] = (
            _number(rec, "px", line_no),
            _number(rec, "py", line_no),
        )
    out = []
    for pid in sorted(samples):
        frames = sorted(samples[pid])
        for a, b in zip(frames, frames[1:]):
            if b != a + 1:
                raise RecordError(
                    line_of[(pid, b)],
                    f"path '{pid}' breaks the contiguous-span invariant: "
                    f"frame {b} follows {a}",
                )
        out.append(PathAnnotation(path_id=pid, samples=samples[pid]))
    return out


def write_paths(f: TextIO, paths: Iterable[PathAnnotation]) -> None:
    for p in sorted(paths, key=lambda p: p.path_id):
        for frame in sorted(p.samples):
            px, py = p.samples[frame]
            f.write(json.dumps(
                {"path_id": p.path_id, "frame": frame, "px": px, "py": py}
            ) + "\n")


# --- point tracks -----------------------------------------------------------

def read_tracks(f: TextIO) -> list[PointTrack]:
    out = []
    seen = set()
    for line_no, line in _lines(f):
        rec = _parse_line(line, line_no, ("track_id", "start_frame", "points"))
        pts = rec["points"]
        if not isinstance(pts, list) or not pts:
            raise RecordError(line_no, "field 'points' must be a non-empty array")
        parsed = []
        for p in pts:
            if (not isinstance(p, list) or len(p) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                               and math.isfinite(v) for v in p)):
                raise RecordError(line_no, "field 'points' entries must be [x, y] pairs")
            parsed.append((float(p[0]), float(p[1])))
        tid = str(rec["track_id"])
        if tid in seen:
            raise RecordError(line_no, f"duplicate track id '{tid}'")
        seen.add(tid)
        out.append(PointTrack(
            track_id=tid,
            start_frame=_frame(rec, line_no, "start_frame"),
            points=tuple(parsed),
        ))
    return out


def write_tracks(f: TextIO, tracks: Iterable[PointTrack]) -> None:
    for t in sorted(tracks, key=lambda t: (t.start_frame, t.track_id)):
        f.write(json.dumps({
            "track_id": t.track_id,
            "start_frame": t.start_frame,
            "points": [[x, y] for x, y in t.points],
        }) + "\n")


# --- box annotations ----------------------------------------------------------

def read_boxes(f: TextIO) -> list[BoxAnnotation]:
    out = []
    seen = set()
    for line_no, line in _lines(f):
        rec = _parse_line(line, line_no, ("path_id", "frame", "x", "y", "w", "h"))
        key = (str(rec["path_id"]), _frame(rec, line_no))
        if key in seen:
            raise RecordError(
                line_no, f"duplicate box for path '{key[0]}' at frame {key[1]}"
            )
        seen.add(key)
        out.append(BoxAnnotation(
            path_id=key[0], frame=key[1], box=_box(rec, line_no)
        ))
    return out


def write_boxes(f: TextIO, boxes: Iterable[BoxAnnotation]) -> None:
    for b in sorted(boxes, key=lambda b: (b.path_id, b.frame)):
        f.write(json.dumps({
            "path_id": b.path_id, "frame": b.frame,
            "x": b.box.x, "y": b.box.y, "w": b.box.w, "h": b.box.h,
        }) + "\n")


# --- trajectories (and ground truth, which shares the format) ----------------

def read_trajectories(f: TextIO) -> list[Trajectory]:
    entries: dict[str, dict[int, tuple[Box, str]]] = {}
    line_of: dict[tuple[str, int], int] = {}
    for line_no, line in _lines(f):
        rec = _parse_line(line, line_no, ("path_id", "frame", "x", "y", "w", "h", "source"))
        src = rec["source"]
        if src not in SOURCES:
            raise RecordError(
                line_no, f"field 'source' must be one of {sorted(SOURCES)}, got '{src}'"
            )
        pid = str(rec["path_id"])
        frame = _frame(rec, line_no)
        if (pid, frame) in line_of:
            raise RecordError(line_no, f"duplicate box for trajectory '{pid}' frame {frame}")
        line_of[(pid, frame)] = line_no
        entries.setdefault(pid, {})[frame] = (_box(rec, line_no), src)
    out = []
    for pid in sorted(entries):
        frames = sorted(entries[pid])
        for a, b in zip(frames, frames[1:]):
            if b != a + 1:
                raise RecordError(
                    line_of[(pid, b)],
                    f"trajectory '{pid}' breaks the contiguous-span invariant: "
                    f"frame {b} follows {a}",
                )
        out.append(Trajectory(path_id=pid, entries=entries[pid]))
    return out


def write_trajectories(f: TextIO, trajectories: Iterable[Trajectory]) -> None:
    for t in sorted(trajectories, key=lambda t: t.path_id):
        for frame in sorted(t.entries):
            box, src = t.entries[frame]
            f.write(json.dumps({
                "path_id": t.path_id, "frame": frame,
                "x": box.x, "y": box.y, "w": box.w, "h": box.h,
                "source": src,
            }) + "\n")


read_gt = read_trajectories
write_gt = write_trajectories


# --- file helpers -------------------------------------------------------------

_READERS = {
    "detections": read_detections,
    "paths": read_paths,
    "tracks": read_tracks,
    "boxes": read_boxes,
    "trajectories": read_trajectories,
    "gt": read_gt,
}

_WRITERS = {
    "detections": write_detections,
    "paths": write_paths,
    "tracks": write_tracks,
    "boxes": write_boxes,
    "trajectories": write_trajectories,
    "gt": write_gt,
}


def read_file(kind: str, path: str | Path):
    with open(path, encoding="utf-8") as f:
        return _READERS[kind](f)


def write_file(kind: str, path: str | Path, records) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8") as f:
        _WRITERS[kind](f, records)


def load_engine_config(path: str | Path) -> EngineConfig:
    """Engine settings from the 'engine' section of a JSON config file."""
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    section = raw.get("engine", raw)
    known = {k: v for k, v in section.items() if k in EngineConfig.__dataclass_fields__}
    if "fps" not in known:
        raise ValueError("config must define engine.fps")
    return EngineConfig(**known)
