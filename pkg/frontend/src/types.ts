// Wire types for the formlearn service JSON API. Coordinates are meters in
// the field frame: origin at the field centre, x toward the opponent goal.

export interface Point {
  x: number;
  y: number;
}

export type Pair = [number, number];

export interface FieldSize {
  length: number;
  width: number;
}

export interface ProjectSummary {
  schema_version: number;
  dataset: {
    snapshots: number;
    feature_rows: string[];
    agent_rows: string[];
    field: FieldSize;
  };
  graphs: string[];
  trained: string[];
  traces: string[];
}

export interface SnapshotPayload {
  features: number[];
  targets: Pair[];
}

export interface DatasetDocument {
  field: FieldSize;
  feature_rows: string[];
  agent_rows: string[];
  snapshots: SnapshotPayload[];
}

export interface MutationResult {
  snapshots: number;
  index?: number;
}

export interface TrainJob {
  id: number;
  context: string;
  seed: number;
  state: 'queued' | 'running' | 'done' | 'failed';
  error: string | null;
}

export interface TrainStatus {
  busy: boolean;
  jobs: TrainJob[];
}

export interface Prediction {
  context: string;
  targets: Record<string, Pair>;
}

export interface ContextsInfo {
  context_set: { contexts: string[]; initial: string; rules: unknown[] } | null;
  graphs: string[];
  trained: string[];
}

export interface TraceRecord {
  cycle: number;
  ball: Pair;
  perceived: Pair;
  targets: Record<string, Pair>;
  actual: Record<string, Pair>;
  context: string;
  chaser: string | null;
}

export interface TraceDocument {
  agent_ids: string[];
  ball_start: Pair;
  start: Record<string, Pair>;
  records: TraceRecord[];
}
