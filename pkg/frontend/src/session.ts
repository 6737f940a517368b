import type { Api } from './api';
import type { DatasetDocument, FieldSize, Pair, Point, SnapshotPayload } from './types';
import { NUDGE_STEP } from './transform';

/** Thrown when navigation would silently drop edits. */
export class UnsavedChanges extends Error {
  constructor() {
    super('unsaved changes; save or discard first');
    this.name = 'UnsavedChanges';
  }
}

function defaultTargets(agentIds: string[], field: FieldSize): Map<string, Point> {
  // Fresh snapshots start with everyone lined up in their own half; the
  // operator drags markers from there.
  const targets = new Map<string, Point>();
  const n = agentIds.length;
  agentIds.forEach((id, i) => {
    const frac = n === 1 ? 0.5 : i / (n - 1);
    targets.set(id, {
      x: -field.length / 4,
      y: (frac - 0.5) * (field.width * 2 / 3),
    });
  });
  return targets;
}

/**
 * Editing state for one snapshot at a time, backed by the service.
 *
 * The server is authoritative: every save round-trips through the API and the
 * local dataset copy is refetched afterwards, so the buffer always shows what
 * the server stored (including its canonical float rounding).
 */
export class AnnotatorSession {
  private doc: DatasetDocument;
  private features = new Map<string, number>();
  private targets = new Map<string, Point>();
  private editIndex: number | null = null;
  private edited = false;

  private constructor(
    private readonly api: Api,
    doc: DatasetDocument,
  ) {
    this.doc = doc;
    this.resetBuffer();
  }

  static async open(api: Api): Promise<AnnotatorSession> {
    return new AnnotatorSession(api, await api.getDataset());
  }

  get field(): FieldSize {
    return this.doc.field;
  }

  get featureRows(): string[] {
    return this.doc.feature_rows;
  }

  get agentIds(): string[] {
    return this.doc.agent_rows;
  }

  get count(): number {
    return this.doc.snapshots.length;
  }

  get snapshots(): SnapshotPayload[] {
    return this.doc.snapshots;
  }

  /** Index of the snapshot being edited, or null for a new one. */
  get currentIndex(): number | null {
    return this.editIndex;
  }

  get dirty(): boolean {
    return this.edited;
  }

  get hasBall(): boolean {
    return this.features.has('ball_x') && this.features.has('ball_y');
  }

  ball(): Point {
    return { x: this.features.get('ball_x') ?? 0, y: this.features.get('ball_y') ?? 0 };
  }

  target(agentId: string): Point {
    const p = this.targets.get(agentId);
    if (!p) {
      throw new Error(`unknown agent ${agentId}`);
    }
    return { ...p };
  }

  featureValue(name: string): number {
    const v = this.features.get(name);
    if (v === undefined) {
      throw new Error(`unknown feature row ${name}`);
    }
    return v;
  }

  // -- navigation ----------------------------------------------------------

  /** Start a fresh snapshot: ball at the centre mark, agents at defaults. */
  newSnapshot(): void {
    this.guardClean();
    this.editIndex = null;
    this.resetBuffer();
  }

  openSnapshot(index: number): void {
    this.guardClean();
    const snap = this.doc.snapshots[index];
    if (!snap) {
      throw new Error(`no snapshot ${index}`);
    }
    this.editIndex = index;
    this.loadBuffer(snap);
  }

  /** Drop edits and reload the buffer from the last saved state. */
  discard(): void {
    if (this.editIndex === null) {
      this.resetBuffer();
    } else {
      this.loadBuffer(this.doc.snapshots[this.editIndex]);
    }
    this.edited = false;
  }

  private guardClean(): void {
    if (this.edited) {
      throw new UnsavedChanges();
    }
  }

  // -- editing -------------------------------------------------------------

  moveBall(p: Point): void {
    if (!this.hasBall) {
      throw new Error('dataset has no ball_x/ball_y feature rows');
    }
    this.features.set('ball_x', p.x);
    this.features.set('ball_y', p.y);
    this.edited = true;
  }

  moveAgent(agentId: string, p: Point): void {
    if (!this.targets.has(agentId)) {
      throw new Error(`unknown agent ${agentId}`);
    }
    this.targets.set(agentId, { ...p });
    this.edited = true;
  }

  /** Arrow-key nudge: dx/dy in steps of 0.1 m. */
  nudge(marker: 'ball' | string, dx: number, dy: number): void {
    const delta = { x: dx * NUDGE_STEP, y: dy * NUDGE_STEP };
    if (marker === 'ball') {
      const b = this.ball();
      this.moveBall({ x: b.x + delta.x, y: b.y + delta.y });
    } else {
      const t = this.target(marker);
      this.moveAgent(marker, { x: t.x + delta.x, y: t.y + delta.y });
    }
  }

  /** Turn a model prediction into a new editable snapshot. */
  adoptPrediction(ball: Point, predicted: Record<string, Pair>): void {
    this.guardClean();
    this.editIndex = null;
    this.resetBuffer();
    this.moveBall(ball);
    for (const [id, [x, y]] of Object.entries(predicted)) {
      this.moveAgent(id, { x, y });
    }
  }

  // -- persistence ---------------------------------------------------------

  payload(): SnapshotPayload {
    return {
      features: this.doc.feature_rows.map((name) => this.features.get(name) ?? 0),
      targets: this.doc.agent_rows.map((id) => {
        const p = this.target(id);
        return [p.x, p.y] as Pair;
      }),
    };
  }

  /**
   * Persist the buffer and reconcile with the server. Returns the snapshot
   * index. On failure the buffer (and its dirty flag) survive for a retry.
   */
  async save(): Promise<number> {
    const snap = this.payload();
    const result =
      this.editIndex === null
        ? await this.api.addSnapshot(snap)
        : await this.api.updateSnapshot(this.editIndex, snap);
    const index = result.index ?? this.editIndex ?? 0;
    this.doc = await this.api.getDataset();
    this.editIndex = index;
    this.loadBuffer(this.doc.snapshots[index]);
    return index;
  }

  async remove(index: number): Promise<void> {
    await this.api.deleteSnapshot(index);
    this.doc = await this.api.getDataset();
    if (this.editIndex !== null && this.editIndex >= this.doc.snapshots.length) {
      this.editIndex = null;
      this.resetBuffer();
    } else if (this.editIndex !== null) {
      this.loadBuffer(this.doc.snapshots[this.editIndex]);
    }
  }

  // -- buffer helpers ------------------------------------------------------

  private resetBuffer(): void {
    this.features = new Map(this.doc.feature_rows.map((name) => [name, 0]));
    this.targets = defaultTargets(this.doc.agent_rows, this.doc.field);
    this.edited = false;
  }

  private loadBuffer(snap: SnapshotPayload): void {
    this.features = new Map(
      this.doc.feature_rows.map((name, i) => [name, snap.features[i] ?? 0]),
    );
    this.targets = new Map(
      this.doc.agent_rows.map((id, i) => {
        const [x, y] = snap.targets[i] ?? [0, 0];
        return [id, { x, y }];
      }),
    );
    this.edited = false;
  }
}
