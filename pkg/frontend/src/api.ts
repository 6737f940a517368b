import type {
  ContextsInfo,
  DatasetDocument,
  MutationResult,
  Prediction,
  ProjectSummary,
  SnapshotPayload,
  TraceDocument,
  TrainStatus,
} from './types';

/** Error decoded from the service's {"error": {code, message}} envelope. */
export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export interface Api {
  getProject(): Promise<ProjectSummary>;
  getDataset(): Promise<DatasetDocument>;
  addSnapshot(snap: SnapshotPayload): Promise<MutationResult>;
  updateSnapshot(index: number, snap: SnapshotPayload): Promise<MutationResult>;
  deleteSnapshot(index: number): Promise<MutationResult>;
  getContexts(): Promise<ContextsInfo>;
  startTraining(context?: string, seed?: number): Promise<{ job: number; status: string }>;
  trainStatus(): Promise<TrainStatus>;
  predict(context: string, ballX: number, ballY: number): Promise<Prediction>;
  getTrace(run: string): Promise<TraceDocument>;
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, init);
  if (!res.ok) {
    let code = 'http_error';
    let message = `${res.status} ${res.statusText}`;
    try {
      const body = await res.json();
      if (body?.error?.code) {
        code = body.error.code;
        message = body.error.message;
      }
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(code, message, res.status);
  }
  return (await res.json()) as T;
}

function jsonInit(method: string, payload?: unknown): RequestInit {
  const init: RequestInit = { method };
  if (payload !== undefined) {
    init.headers = { 'content-type': 'application/json' };
    init.body = JSON.stringify(payload);
  }
  return init;
}

/** Thin fetch client for the formlearn service. */
export class HttpApi implements Api {
  constructor(private readonly base = '') {}

  getProject(): Promise<ProjectSummary> {
    return request(`${this.base}/api/project`);
  }

  getDataset(): Promise<DatasetDocument> {
    return request(`${this.base}/api/dataset`);
  }

  addSnapshot(snap: SnapshotPayload): Promise<MutationResult> {
    return request(`${this.base}/api/dataset/snapshots`, jsonInit('POST', snap));
  }

  updateSnapshot(index: number, snap: SnapshotPayload): Promise<MutationResult> {
    return request(`${this.base}/api/dataset/snapshots/${index}`, jsonInit('PUT', snap));
  }

  deleteSnapshot(index: number): Promise<MutationResult> {
    return request(`${this.base}/api/dataset/snapshots/${index}`, jsonInit('DELETE'));
  }

  getContexts(): Promise<ContextsInfo> {
    return request(`${this.base}/api/contexts`);
  }

  startTraining(context?: string, seed = 0): Promise<{ job: number; status: string }> {
    const q = new URLSearchParams({ seed: String(seed) });
    if (context !== undefined) {
      q.set('context', context);
    }
    return request(`${this.base}/api/train?${q}`, jsonInit('POST'));
  }

  trainStatus(): Promise<TrainStatus> {
    return request(`${this.base}/api/train/status`);
  }

  predict(context: string, ballX: number, ballY: number): Promise<Prediction> {
    const q = new URLSearchParams({
      context,
      ball_x: String(ballX),
      ball_y: String(ballY),
    });
    return request(`${this.base}/api/predict?${q}`);
  }

  getTrace(run: string): Promise<TraceDocument> {
    return request(`${this.base}/api/trace/${encodeURIComponent(run)}`);
  }
}
