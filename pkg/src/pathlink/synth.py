"""Seeded synthetic scenarios: ground truth, noisy detections, point tracks,
and a simulated cursor-following annotator.

Everything is drawn from one RNG in a fixed order, so a seed pins the whole
scenario bit-for-bit. With all noise knobs at zero the detections equal the
true boxes and the simulated cursor sits exactly on each object's center.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, asdict
from pathlib import Path

from . import io as record_io
from .model import (
    Box,
    BoxAnnotation,
    Detection,
    PathAnnotation,
    PointTrack,
    Trajectory,
    SOURCE_DETECTED,
    box_iou,
    clamp_score,
)


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_objects: int = 5
    n_frames: int = 300
    fps: float = 10.0
    arena_w: float = 640.0
    arena_h: float = 480.0
    size_min: float = 40.0
    size_max: float = 80.0
    # motion: piecewise-linear waypoints plus a sinusoidal wobble
    waypoint_spacing_s: tuple[float, float] = (2.0, 5.0)
    speed_range: tuple[float, float] = (20.0, 80.0)      # px/s
    wobble_amp_frac: tuple[float, float] = (0.08, 0.18)  # of object size
    wobble_period_s: tuple[float, float] = (2.0, 4.0)
    span_inset_s: float = 0.0        # objects may appear/leave this much inside the clip
    # detection noise
    miss_rate: float = 0.0
    fp_rate: float = 0.0             # expected false positives per frame
    center_jitter: float = 0.0       # sigma as a fraction of object size
    size_jitter: float = 0.0         # sigma as a fraction of object size
    score_sharpness: float = 8.0     # slope of the IoU-to-score squash
    score_midpoint: float = 0.5
    score_noise: float = 0.0
    # point tracks
    tracks_per_object: int = 8
    track_survival: float = 1.0      # per-frame survival probability
    background_tracks: int = 0
    # simulated annotator
    cursor_lag_frames: int = 0
    cursor_noise: float = 0.0        # mean-reverting offset sigma, fraction of size
    cursor_excursion_rate: float = 0.0   # max fraction of frames outside the box
    cursor_excursion_len: int = 5
    playback_slowdown: float = 0.33
    boxes_per_object: int = 3

    def __post_init__(self):
        for name in ("miss_rate", "track_survival", "cursor_excursion_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0,1]")
        for name in ("center_jitter", "size_jitter", "cursor_noise", "fp_rate",
                     "score_noise"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.n_objects < 1 or self.n_frames < 2:
            raise ValueError("need at least one object and two frames")
        if self.size_max * 2 > min(self.arena_w, self.arena_h):
            raise ValueError("arena too small for the object size range")


@dataclass
class Scenario:
    config: SynthConfig
    ground_truth: list[Trajectory]
    detections: list[Detection]
    tracks: list[PointTrack]
    paths: list[PathAnnotation]
    boxes: list[BoxAnnotation]

    def write_dir(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        record_io.write_file("detections", out / "detections.jsonl", self.detections)
        record_io.write_file("paths", out / "paths.jsonl", self.paths)
        record_io.write_file("tracks", out / "tracks.jsonl", self.tracks)
        record_io.write_file("boxes", out / "boxes.jsonl", self.boxes)
        record_io.write_file("gt", out / "gt.jsonl", self.ground_truth)
        with open(out / "config.json", "w", encoding="utf-8") as f:
            json.dump(
                {"synth": asdict(self.config), "engine": {"fps": self.config.fps}},
                f, indent=2, sort_keys=True,
            )
            f.write("\n")


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _poisson(rng: random.Random, lam: float) -> int:
    if lam <= 0:
        return 0
    limit = math.exp(-lam)
    k, p = 0, 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


@dataclass
class _ObjectMotion:
    w: float
    h: float
    start: int
    end: int
    centers: list[tuple[float, float]]  # indexed by frame - start

    def box_at(self, frame: int) -> Box:
        cx, cy = self.centers[frame - self.start]
        return Box(cx - self.w / 2.0, cy - self.h / 2.0, self.w, self.h)


def _clamp(v: float, lo: float, hi: float) -> float:
    return min(max(v, lo), hi)


def _make_motion(cfg: SynthConfig, rng: random.Random) -> _ObjectMotion:
    w = rng.uniform(cfg.size_min, cfg.size_max)
    h = rng.uniform(cfg.size_min, cfg.size_max)
    inset = round(cfg.span_inset_s * cfg.fps)
    start = rng.randint(0, inset) if inset else 0
    end = cfg.n_frames - 1 - (rng.randint(0, inset) if inset else 0)
    if end - start < 1:
        start, end = 0, cfg.n_frames - 1

    lo_x, hi_x = w / 2.0, cfg.arena_w - w / 2.0
    lo_y, hi_y = h / 2.0, cfg.arena_h - h / 2.0
    waypoints: list[tuple[int, float, float]] = [
        (start, rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y))
    ]
    while waypoints[-1][0] < end:
        t_prev, x_prev, y_prev = waypoints[-1]
        dt = max(1, round(rng.uniform(*cfg.waypoint_spacing_s) * cfg.fps))
        t = min(t_prev + dt, end)
        speed = rng.uniform(*cfg.speed_range)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        dist = speed * (t - t_prev) / cfg.fps
        x = _clamp(x_prev + dist * math.cos(angle), lo_x, hi_x)
        y = _clamp(y_prev + dist * math.sin(angle), lo_y, hi_y)
        waypoints.append((t, x, y))

    amp_x = rng.uniform(*cfg.wobble_amp_frac) * w
    amp_y = rng.uniform(*cfg.wobble_amp_frac) * h
    period = rng.uniform(*cfg.wobble_period_s) * cfg.fps
    phase_x = rng.uniform(0.0, 2.0 * math.pi)
    phase_y = rng.uniform(0.0, 2.0 * math.pi)

    centers = []
    seg = 0
    for f in range(start, end + 1):
        while seg + 1 < len(waypoints) and waypoints[seg + 1][0] <= f:
            seg += 1
        t0, x0, y0 = waypoints[seg]
        t1, x1, y1 = waypoints[seg + 1] if seg + 1 < len(waypoints) else waypoints[seg]
        if t1 == t0:
            x, y = x0, y0
        else:
            u = _clamp((f - t0) / (t1 - t0), 0.0, 1.0)
            x, y = x0 + (x1 - x0) * u, y0 + (y1 - y0) * u
        x += amp_x * math.sin(2.0 * math.pi * f / period + phase_x)
        y += amp_y * math.sin(2.0 * math.pi * f / period + phase_y)
        centers.append((_clamp(x, lo_x, hi_x), _clamp(y, lo_y, hi_y)))
    return _ObjectMotion(w=w, h=h, start=start, end=end, centers=centers)


def _make_tracks(
    cfg: SynthConfig, rng: random.Random, obj_idx: int, motion: _ObjectMotion
) -> list[PointTrack]:
    """Point tracks riding the object; each death respawns a fresh track so
    the per-object track count stays constant."""
    tracks: list[PointTrack] = []
    serial = 0

    def new_slot(frame: int) -> dict:
        nonlocal serial
        slot = {
            "id": f"t{obj_idx:02d}_{serial:04d}",
            "start": frame,
            "u": rng.uniform(0.02, 0.98),
            "v": rng.uniform(0.02, 0.98),
            "points": [],
        }
        serial += 1
        return slot

    slots = [new_slot(motion.start) for _ in range(cfg.tracks_per_object)]
    for f in range(motion.start, motion.end + 1):
        box = motion.box_at(f)
        for i, slot in enumerate(slots):
            if f > slot["start"] and rng.random() > cfg.track_survival:
                tracks.append(PointTrack(
                    track_id=slot["id"], start_frame=slot["start"],
                    points=tuple(slot["points"]),
                ))
                slot = new_slot(f)
                slots[i] = slot
            slot["points"].append((box.x + slot["u"] * box.w, box.y + slot["v"] * box.h))
    for slot in slots:
        tracks.append(PointTrack(
            track_id=slot["id"], start_frame=slot["start"],
            points=tuple(slot["points"]),
        ))
    return tracks


def _make_background_tracks(cfg: SynthConfig, rng: random.Random) -> list[PointTrack]:
    tracks = []
    for k in range(cfg.background_tracks):
        start = rng.randint(0, cfg.n_frames - 2)
        length = rng.randint(2, cfg.n_frames - start)
        x = rng.uniform(0.0, cfg.arena_w)
        y = rng.uniform(0.0, cfg.arena_h)
        vx = rng.uniform(-30.0, 30.0) / cfg.fps
        vy = rng.uniform(-30.0, 30.0) / cfg.fps
        pts = []
        for _ in range(length):
            pts.append((x, y))
            x = _clamp(x + vx, 0.0, cfg.arena_w)
            y = _clamp(y + vy, 0.0, cfg.arena_h)
        tracks.append(PointTrack(track_id=f"bg_{k:04d}", start_frame=start,
                                 points=tuple(pts)))
    return tracks


def _score_for_iou(cfg: SynthConfig, rng: random.Random, iou: float) -> float:
    z = cfg.score_sharpness * (iou - cfg.score_midpoint)
    if cfg.score_noise > 0:
        z += rng.gauss(0.0, cfg.score_noise)
    return clamp_score(_sigmoid(z))


def _make_detections(
    cfg: SynthConfig, rng: random.Random, motions: list[_ObjectMotion]
) -> list[Detection]:
    dets: list[Detection] = []
    serial = 0
    for f in range(cfg.n_frames):
        live = [(i, m) for i, m in enumerate(motions) if m.start <= f <= m.end]
        for i, m in live:
            if cfg.miss_rate > 0 and rng.random() < cfg.miss_rate:
                continue
            true_box = m.box_at(f)
            if cfg.center_jitter == 0.0 and cfg.size_jitter == 0.0:
                box = true_box
            else:
                cx = true_box.cx + (rng.gauss(0.0, cfg.center_jitter * m.w)
                                    if cfg.center_jitter else 0.0)
                cy = true_box.cy + (rng.gauss(0.0, cfg.center_jitter * m.h)
                                    if cfg.center_jitter else 0.0)
                w = max(2.0, m.w * (1.0 + (rng.gauss(0.0, cfg.size_jitter)
                                           if cfg.size_jitter else 0.0)))
                h = max(2.0, m.h * (1.0 + (rng.gauss(0.0, cfg.size_jitter)
                                           if cfg.size_jitter else 0.0)))
                box = Box(cx - w / 2.0, cy - h / 2.0, w, h)
            score = _score_for_iou(cfg, rng, box_iou(box, true_box))
            dets.append(Detection(id=f"d{serial:06d}", frame=f, box=box, score=score))
            serial += 1
        for _ in range(_poisson(rng, cfg.fp_rate)):
            w = rng.uniform(cfg.size_min, cfg.size_max)
            h = rng.uniform(cfg.size_min, cfg.size_max)
            cx = rng.uniform(w / 2.0, cfg.arena_w - w / 2.0)
            cy = rng.uniform(h / 2.0, cfg.arena_h - h / 2.0)
            box = Box(cx - w / 2.0, cy - h / 2.0, w, h)
            best_iou = max(
                (box_iou(box, m.box_at(f)) for _, m in live), default=0.0
            )
            score = _score_for_iou(cfg, rng, best_iou)
            dets.append(Detection(id=f"d{serial:06d}", frame=f, box=box, score=score))
            serial += 1
    return dets


def _make_path(
    cfg: SynthConfig, rng: random.Random, obj_idx: int, motion: _ObjectMotion
) -> PathAnnotation:
    span = motion.end - motion.start + 1
    outside: set[int] = set()
    if cfg.cursor_excursion_rate > 0 and cfg.cursor_excursion_len > 0:
        budget = int(span * cfg.cursor_excursion_rate)
        n_exc = budget // cfg.cursor_excursion_len
        for _ in range(n_exc):
            s = rng.randint(motion.start, motion.end)
            outside.update(range(s, min(s + cfg.cursor_excursion_len, motion.end + 1)))
        # hard cap so the inside-fraction guarantee holds exactly
        if len(outside) > budget:
            outside = set(sorted(outside)[:budget])

    samples: dict[int, tuple[float, float]] = {}
    ox, oy = 0.0, 0.0
    decay = 0.85
    for f in range(motion.start, motion.end + 1):
        lag_f = max(motion.start, f - cfg.cursor_lag_frames)
        tx, ty = motion.centers[lag_f - motion.start]
        if cfg.cursor_noise > 0:
            ox = decay * ox + rng.gauss(0.0, cfg.cursor_noise * motion.w)
            oy = decay * oy + rng.gauss(0.0, cfg.cursor_noise * motion.h)
        box = motion.box_at(f)
        if f in outside:
            side = rng.choice((0, 1, 2, 3))
            bump = 5.0 + abs(rng.gauss(0.0, motion.w / 4.0))
            px, py = box.cx, box.cy
            if side == 0:
                px = box.x - bump
            elif side == 1:
                px = box.x + box.w + bump
            elif side == 2:
                py = box.y - bump
            else:
                py = box.y + box.h + bump
        else:
            inset_x = min(1.0, box.w / 10.0)
            inset_y = min(1.0, box.h / 10.0)
            px = _clamp(tx + ox, box.x + inset_x, box.x + box.w - inset_x)
            py = _clamp(ty + oy, box.y + inset_y, box.y + box.h - inset_y)
        samples[f] = (px, py)
    return PathAnnotation(path_id=f"p{obj_idx:02d}", samples=samples)


def generate_scenario(cfg: SynthConfig) -> Scenario:
    """Build a full scenario; deterministic for a fixed config."""
    rng = random.Random(cfg.seed)
    motions = [_make_motion(cfg, rng) for _ in range(cfg.n_objects)]

    ground_truth = []
    for i, m in enumerate(motions):
        entries = {f: (m.box_at(f), SOURCE_DETECTED) for f in range(m.start, m.end + 1)}
        ground_truth.append(Trajectory(path_id=f"p{i:02d}", entries=entries))

    tracks: list[PointTrack] = []
    for i, m in enumerate(motions):
        tracks.extend(_make_tracks(cfg, rng, i, m))
    tracks.extend(_make_background_tracks(cfg, rng))

    detections = _make_detections(cfg, rng, motions)
    paths = [_make_path(cfg, rng, i, m) for i, m in enumerate(motions)]

    boxes: list[BoxAnnotation] = []
    for i, m in enumerate(motions):
        frames = uniform_frames(m.start, m.end, cfg.boxes_per_object)
        for f in frames:
            boxes.append(BoxAnnotation(path_id=f"p{i:02d}", frame=f, box=m.box_at(f)))
    return Scenario(
        config=cfg,
        ground_truth=ground_truth,
        detections=detections,
        tracks=tracks,
        paths=paths,
        boxes=boxes,
    )


def uniform_frames(first: int, last: int, k: int) -> list[int]:
    """k frames spread uniformly in time over [first, last]."""
    if k <= 0:
        return []
    if k == 1:
        return [round((first + last) / 2)]
    span = last - first
    frames = sorted({first + round(i * span / (k - 1)) for i in range(k)})
    return frames
