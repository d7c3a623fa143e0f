/** Path recording: one cursor sample per rendered frame while the video
 * plays, resampled to one sample per video frame before upload.
 *
 * Rendered frames and video frames need not line up: slow playback renders
 * a video frame several times (keep the latest cursor position), fast
 * playback or dropped frames skip video frames (fill by linear
 * interpolation between the neighbouring sampled frames). */

import type { PathSample } from "./types";

export interface RawSample {
  /** video playback time in seconds at the moment of sampling */
  time: number;
  px: number;
  py: number;
}

export function frameFromTime(time: number, fps: number): number {
  return Math.round(time * fps);
}

/** Collapse rendered-frame samples onto video frames, keeping the latest
 * cursor position seen for each frame. */
export function collapseToFrames(
  raw: readonly RawSample[],
  fps: number,
): Map<number, { px: number; py: number }> {
  const byFrame = new Map<number, { px: number; py: number }>();
  for (const s of raw) {
    byFrame.set(frameFromTime(s.time, fps), { px: s.px, py: s.py });
  }
  return byFrame;
}

/** Fill interior gaps by linear interpolation so the result is contiguous. */
export function fillGaps(
  byFrame: Map<number, { px: number; py: number }>,
): PathSample[] {
  const frames = [...byFrame.keys()].sort((a, b) => a - b);
  if (frames.length === 0) return [];
  const out: PathSample[] = [];
  for (let i = 0; i < frames.length; i++) {
    const f = frames[i];
    const cur = byFrame.get(f)!;
    out.push({ frame: f, px: cur.px, py: cur.py });
    if (i + 1 < frames.length) {
      const next = frames[i + 1];
      const nxt = byFrame.get(next)!;
      for (let g = f + 1; g < next; g++) {
        const t = (g - f) / (next - f);
        out.push({
          frame: g,
          px: cur.px + (nxt.px - cur.px) * t,
          py: cur.py + (nxt.py - cur.py) * t,
        });
      }
    }
  }
  return out;
}

export function resampleToFrames(
  raw: readonly RawSample[],
  fps: number,
): PathSample[] {
  return fillGaps(collapseToFrames(raw, fps));
}

export type RecorderState = "idle" | "recording" | "paused";

/** State machine driving one path recording.
 *
 * `sample` is called once per rendered frame by the playback loop; samples
 * arriving while paused are ignored, so pausing and resuming the video
 * leaves no gap (the recording continues from the same playback position). */
export class PathRecorder {
  private raw: RawSample[] = [];
  private _state: RecorderState = "idle";
  private _pathId: string | null = null;

  constructor(private readonly fps: number) {}

  get state(): RecorderState {
    return this._state;
  }

  get pathId(): string | null {
    return this._pathId;
  }

  start(pathId: string): void {
    if (this._state !== "idle") {
      throw new Error("a path recording is already active");
    }
    this._pathId = pathId;
    this.raw = [];
    this._state = "recording";
  }

  sample(time: number, px: number, py: number): void {
    if (this._state !== "recording") return;
    this.raw.push({ time, px, py });
  }

  pause(): void {
    if (this._state === "recording") this._state = "paused";
  }

  resume(): void {
    if (this._state === "paused") this._state = "recording";
  }

  /** Finish and return the contiguous per-frame path.
   * Throws when fewer than two distinct frames were covered: a
   * single-sample path carries no time span worth uploading. */
  stop(): { pathId: string; samples: PathSample[] } {
    if (this._state === "idle" || this._pathId === null) {
      throw new Error("no active recording");
    }
    const samples = resampleToFrames(this.raw, this.fps);
    const pathId = this._pathId;
    this._state = "idle";
    this._pathId = null;
    this.raw = [];
    if (samples.length < 2) {
      throw new Error("recording spans fewer than two frames");
    }
    return { pathId, samples };
  }

  abort(): void {
    this._state = "idle";
    this._pathId = null;
    this.raw = [];
  }
}
