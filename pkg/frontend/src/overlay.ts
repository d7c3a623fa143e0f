/** Trajectory overlay: pure selection/transform helpers plus canvas drawing.
 * Cursor events arrive in displayed (CSS) pixels; the engine speaks native
 * video pixels, so every exchange goes through this transform. */

import type { TrajectoryRecord, TrajectorySource } from "./types";

export const SOURCE_COLORS: Record<TrajectorySource, string> = {
  detected: "#2e7d32",
  interpolated: "#1565c0",
  extrapolated: "#ef6c00",
  supervised: "#c62828",
};

export interface ViewTransform {
  scaleX: number;
  scaleY: number;
}

export function viewTransform(
  displayWidth: number,
  displayHeight: number,
  videoWidth: number,
  videoHeight: number,
): ViewTransform {
  return {
    scaleX: displayWidth / videoWidth,
    scaleY: displayHeight / videoHeight,
  };
}

export function toVideoCoords(
  offsetX: number,
  offsetY: number,
  t: ViewTransform,
): { x: number; y: number } {
  return { x: offsetX / t.scaleX, y: offsetY / t.scaleY };
}

export function toDisplayCoords(
  x: number,
  y: number,
  t: ViewTransform,
): { x: number; y: number } {
  return { x: x * t.scaleX, y: y * t.scaleY };
}

export function boxesAtFrame(
  records: readonly TrajectoryRecord[],
  frame: number,
): TrajectoryRecord[] {
  return records.filter((r) => r.frame === frame);
}

export function drawOverlay(
  ctx: CanvasRenderingContext2D,
  records: readonly TrajectoryRecord[],
  frame: number,
  t: ViewTransform,
): void {
  for (const rec of boxesAtFrame(records, frame)) {
    const o = toDisplayCoords(rec.x, rec.y, t);
    ctx.strokeStyle = SOURCE_COLORS[rec.source];
    ctx.lineWidth = rec.source === "supervised" ? 3 : 2;
    ctx.strokeRect(o.x, o.y, rec.w * t.scaleX, rec.h * t.scaleY);
    ctx.fillStyle = SOURCE_COLORS[rec.source];
    ctx.font = "12px sans-serif";
    ctx.fillText(rec.path_id, o.x + 2, o.y - 4);
  }
}
