"""HTTP service backing the annotator UI.

Sessions persist as directories of the same JSONL files the CLI reads, so
a session can be inspected or re-run offline. Each session serializes its
writes through a lock; inference holds a second non-blocking lock so an
overlapping request gets 409 instead of racing.
"""

from __future__ import annotations

import io as _stringio
import json
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from . import io as record_io
from .model import EngineConfig
from .pipeline import run_pipeline


class SessionCreate(BaseModel):
    fps: float = Field(gt=0)
    n_frames: int = Field(gt=0)
    detections: list[dict] = []
    tracks: list[dict] = []


class PathUpload(BaseModel):
    samples: list[dict]


class BoxUpload(BaseModel):
    boxes: list[dict]


def _records_via(reader, records: list[dict], what: str):
    """Validate request-body records with the same code that parses files."""
    buf = _stringio.StringIO()
    for rec in records:
        buf.write(json.dumps(rec) + "\n")
    buf.seek(0)
    try:
        return reader(buf)
    except record_io.RecordError as e:
        raise HTTPException(status_code=422, detail=f"{what}: {e}") from e


class Session:
    def __init__(self, root: Path, session_id: str):
        self.id = session_id
        self.dir = root / session_id
        self.write_lock = threading.Lock()
        self.infer_lock = threading.Lock()

    @property
    def manifest_path(self) -> Path:
        return self.dir / "manifest.json"

    def manifest(self) -> dict:
        with open(self.manifest_path, encoding="utf-8") as f:
            return json.load(f)

    def save_manifest(self, m: dict) -> None:
        tmp = self.manifest_path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(m, f, indent=2, sort_keys=True)
            f.write("\n")
        tmp.replace(self.manifest_path)

    def read(self, kind: str, name: str):
        path = self.dir / name
        if not path.exists():
            return []
        return record_io.read_file(kind, path)

    def write(self, kind: str, name: str, records) -> None:
        tmp = self.dir / (name + ".tmp")
        record_io.write_file(kind, tmp, records)
        tmp.replace(self.dir / name)


def create_app(root_dir: str | Path) -> FastAPI:
    root = Path(root_dir)
    root.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="pathlink annotation sessions")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    app.state.sessions = sessions

    for existing in sorted(root.iterdir()) if root.exists() else []:
        if (existing / "manifest.json").exists():
            sessions[existing.name] = Session(root, existing.name)

    def get_session(session_id: str) -> Session:
        with registry_lock:
            s = sessions.get(session_id)
        if s is None:
            raise HTTPException(status_code=404, detail=f"unknown session '{session_id}'")
        return s

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreate):
        session_id = uuid.uuid4().hex[:12]
        s = Session(root, session_id)
        s.dir.mkdir(parents=True)
        detections = _records_via(record_io.read_detections, body.detections,
                                  "detections")
        tracks = _records_via(record_io.read_tracks, body.tracks, "tracks")
        s.write("detections", "detections.jsonl", detections)
        s.write("tracks", "tracks.jsonl", tracks)
        s.write("paths", "paths.jsonl", [])
        s.write("boxes", "boxes.jsonl", [])
        s.save_manifest({
            "id": session_id, "fps": body.fps, "n_frames": body.n_frames,
            "revision": 0,
        })
        with registry_lock:
            sessions[session_id] = s
        return {"id": session_id, "fps": body.fps, "n_frames": body.n_frames}

    @app.put("/sessions/{session_id}/detections")
    def put_detections(session_id: str, body: dict):
        s = get_session(session_id)
        records = body.get("detections", []) if isinstance(body, dict) else []
        detections = _records_via(record_io.read_detections, records, "detections")
        with s.write_lock:
            s.write("detections", "detections.jsonl", detections)
        return {"count": len(detections)}

    @app.put("/sessions/{session_id}/tracks")
    def put_tracks(session_id: str, body: dict):
        s = get_session(session_id)
        records = body.get("tracks", []) if isinstance(body, dict) else []
        tracks = _records_via(record_io.read_tracks, records, "tracks")
        with s.write_lock:
            s.write("tracks", "tracks.jsonl", tracks)
        return {"count": len(tracks)}

    @app.put("/sessions/{session_id}/paths/{path_id}")
    def put_path(session_id: str, path_id: str, body: PathUpload):
        s = get_session(session_id)
        for rec in body.samples:
            if rec.get("path_id", path_id) != path_id:
                raise HTTPException(
                    status_code=422,
                    detail=f"sample path_id '{rec['path_id']}' does not match "
                           f"URL path_id '{path_id}'",
                )
        records = [{**rec, "path_id": path_id} for rec in body.samples]
        uploaded = _records_via(record_io.read_paths, records, "paths")
        manifest = s.manifest()
        for p in uploaded:
            if p.last_frame >= manifest["n_frames"]:
                raise HTTPException(
                    status_code=422,
                    detail=f"path '{path_id}' frame {p.last_frame} outside video "
                           f"(n_frames={manifest['n_frames']})",
                )
        with s.write_lock:
            others = [p for p in s.read("paths", "paths.jsonl")
                      if p.path_id != path_id]
            s.write("paths", "paths.jsonl", others + uploaded)
        return {"path_id": path_id,
                "span": [uploaded[0].first_frame, uploaded[0].last_frame]
                if uploaded else None}

    @app.delete("/sessions/{session_id}/paths/{path_id}")
    def delete_path(session_id: str, path_id: str):
        s = get_session(session_id)
        with s.write_lock:
            paths = s.read("paths", "paths.jsonl")
            keep = [p for p in paths if p.path_id != path_id]
            if len(keep) == len(paths):
                raise HTTPException(status_code=404,
                                    detail=f"unknown path '{path_id}'")
            s.write("paths", "paths.jsonl", keep)
            boxes = [b for b in s.read("boxes", "boxes.jsonl")
                     if b.path_id != path_id]
            s.write("boxes", "boxes.jsonl", boxes)
        return {"deleted": path_id}

    @app.put("/sessions/{session_id}/boxes")
    def put_boxes(session_id: str, body: BoxUpload):
        s = get_session(session_id)
        boxes = _records_via(record_io.read_boxes, body.boxes, "boxes")
        with s.write_lock:
            s.write("boxes", "boxes.jsonl", boxes)
        return {"count": len(boxes)}

    @app.post("/sessions/{session_id}/infer")
    def run_inference(session_id: str):
        s = get_session(session_id)
        if not s.infer_lock.acquire(blocking=False):
            raise HTTPException(status_code=409,
                                detail=f"inference already running for '{session_id}'")
        try:
            with s.write_lock:
                detections = s.read("detections", "detections.jsonl")
                tracks = s.read("tracks", "tracks.jsonl")
                paths = s.read("paths", "paths.jsonl")
                boxes = s.read("boxes", "boxes.jsonl")
                manifest = s.manifest()
            if not paths:
                raise HTTPException(status_code=422,
                                    detail="session has no path annotations")
            config = EngineConfig(fps=manifest["fps"])
            try:
                trajectories, report = run_pipeline(
                    detections, paths, tracks, boxes, config
                )
            except ValueError as e:
                raise HTTPException(status_code=422, detail=str(e)) from e
            with s.write_lock:
                manifest = s.manifest()
                revision = manifest["revision"] + 1
                rev_dir = s.dir / "results" / f"rev{revision:04d}"
                rev_dir.mkdir(parents=True, exist_ok=True)
                record_io.write_file("trajectories", rev_dir / "trajectories.jsonl",
                                     trajectories)
                with open(rev_dir / "report.json", "w", encoding="utf-8") as f:
                    json.dump(report.to_dict(), f, indent=2, sort_keys=True)
                    f.write("\n")
                manifest["revision"] = revision
                s.save_manifest(manifest)
            return {"revision": revision,
                    "trajectories": len(trajectories),
                    "failures": report.failures}
        finally:
            s.infer_lock.release()

    @app.get("/sessions/{session_id}/trajectories")
    def get_trajectories(session_id: str):
        s = get_session(session_id)
        manifest = s.manifest()
        revision = manifest["revision"]
        if revision == 0:
            return {"revision": 0, "records": []}
        rev_dir = s.dir / "results" / f"rev{revision:04d}"
        trajectories = record_io.read_file("trajectories",
                                           rev_dir / "trajectories.jsonl")
        records = []
        for t in trajectories:
            for frame in sorted(t.entries):
                box, src = t.entries[frame]
                records.append({
                    "path_id": t.path_id, "frame": frame,
                    "x": box.x, "y": box.y, "w": box.w, "h": box.h,
                    "source": src,
                })
        return {"revision": revision, "records": records}

    @app.get("/sessions/{session_id}/detections")
    def get_detections(
        session_id: str,
        frame_from: int = Query(0, alias="from"),
        frame_to: int | None = Query(None, alias="to"),
    ):
        s = get_session(session_id)
        detections = s.read("detections", "detections.jsonl")
        records = []
        for d in detections:
            if d.frame < frame_from:
                continue
            if frame_to is not None and d.frame > frame_to:
                continue
            records.append({
                "id": d.id, "frame": d.frame,
                "x": d.box.x, "y": d.box.y, "w": d.box.w, "h": d.box.h,
                "score": d.score,
            })
        return {"records": records}

    return app
