/** Typed client for the annotation session HTTP API. */

import type {
  BoxRecord,
  DetectionRecord,
  PathSample,
  SessionInfo,
  TrajectoryPayload,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { detail?: string };
        if (parsed.detail) detail = parsed.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createSession(
    fps: number,
    nFrames: number,
    detections: DetectionRecord[] = [],
  ): Promise<SessionInfo> {
    return this.request("POST", "/sessions", {
      fps,
      n_frames: nFrames,
      detections,
      tracks: [],
    });
  }

  putPath(
    sessionId: string,
    pathId: string,
    samples: PathSample[],
  ): Promise<{ path_id: string; span: [number, number] }> {
    return this.request(
      "PUT",
      `/sessions/${sessionId}/paths/${encodeURIComponent(pathId)}`,
      { samples },
    );
  }

  deletePath(sessionId: string, pathId: string): Promise<{ deleted: string }> {
    return this.request(
      "DELETE",
      `/sessions/${sessionId}/paths/${encodeURIComponent(pathId)}`,
    );
  }

  putBoxes(sessionId: string, boxes: BoxRecord[]): Promise<{ count: number }> {
    return this.request("PUT", `/sessions/${sessionId}/boxes`, { boxes });
  }

  runInference(
    sessionId: string,
  ): Promise<{ revision: number; trajectories: number; failures: string[] }> {
    return this.request("POST", `/sessions/${sessionId}/infer`);
  }

  getTrajectories(sessionId: string): Promise<TrajectoryPayload> {
    return this.request("GET", `/sessions/${sessionId}/trajectories`);
  }

  getDetections(
    sessionId: string,
    from: number,
    to?: number,
  ): Promise<{ records: DetectionRecord[] }> {
    const range = to === undefined ? `from=${from}` : `from=${from}&to=${to}`;
    return this.request("GET", `/sessions/${sessionId}/detections?${range}`);
  }
}
