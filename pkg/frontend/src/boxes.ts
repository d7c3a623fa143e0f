/** Drag-to-draw box tool: positions in native video pixels. */

import type { BoxRecord } from "./types";

const MIN_SIZE_PX = 2;

export class BoxDraft {
  private startX = 0;
  private startY = 0;
  private endX = 0;
  private endY = 0;
  private active = false;

  begin(x: number, y: number): void {
    this.startX = this.endX = x;
    this.startY = this.endY = y;
    this.active = true;
  }

  update(x: number, y: number): void {
    if (!this.active) return;
    this.endX = x;
    this.endY = y;
  }

  get dragging(): boolean {
    return this.active;
  }

  /** Current normalized rectangle, or null when degenerate. */
  current(): { x: number; y: number; w: number; h: number } | null {
    if (!this.active) return null;
    const x = Math.min(this.startX, this.endX);
    const y = Math.min(this.startY, this.endY);
    const w = Math.abs(this.endX - this.startX);
    const h = Math.abs(this.endY - this.startY);
    if (w < MIN_SIZE_PX || h < MIN_SIZE_PX) return null;
    return { x, y, w, h };
  }

  /** Finish the drag; null when the rectangle is too small to mean anything. */
  finish(pathId: string, frame: number): BoxRecord | null {
    const rect = this.current();
    this.active = false;
    if (!rect) return null;
    return { path_id: pathId, frame, ...rect };
  }

  cancel(): void {
    this.active = false;
  }
}

/** Replace-or-append semantics: the server stores one box per (path, frame). */
export function upsertBox(boxes: BoxRecord[], box: BoxRecord): BoxRecord[] {
  const out = boxes.filter(
    (b) => !(b.path_id === box.path_id && b.frame === box.frame),
  );
  out.push(box);
  out.sort((a, b) =>
    a.path_id === b.path_id ? a.frame - b.frame : a.path_id < b.path_id ? -1 : 1,
  );
  return out;
}
