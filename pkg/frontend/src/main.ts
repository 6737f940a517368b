import { ApiError, HttpApi, type Api } from './api';
import { PredictionOverlay } from './overlay';
import { TracePlayback } from './playback';
import { agentColor, drawScene, hitTest, type SceneMarkers } from './scene';
import { AnnotatorSession, UnsavedChanges } from './session';
import { FieldTransform } from './transform';
import type { Point } from './types';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function setStatus(node: HTMLElement, text: string, isError = false): void {
  node.textContent = text;
  node.classList.toggle('error', isError);
}

class App {
  private tf: FieldTransform;
  private overlay: PredictionOverlay | null = null;
  private playback: TracePlayback | null = null;
  private selected: string | null = 'ball';
  private dragging: string | null = null;
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  private readonly canvas = el<HTMLCanvasElement>('field');
  private readonly ctx: CanvasRenderingContext2D;
  private readonly snapshotList = el<HTMLDivElement>('snapshot-list');
  private readonly saveStatus = el<HTMLDivElement>('save-status');
  private readonly trainStatus = el<HTMLDivElement>('train-status');
  private readonly overlayHint = el<HTMLDivElement>('overlay-hint');
  private readonly traceStatus = el<HTMLDivElement>('trace-status');
  private readonly contextSelect = el<HTMLSelectElement>('context-select');
  private readonly traceSelect = el<HTMLSelectElement>('trace-select');
  private readonly scrubber = el<HTMLInputElement>('scrubber');
  private readonly trailsToggle = el<HTMLInputElement>('trails-toggle');

  private constructor(
    private readonly api: Api,
    private readonly session: AnnotatorSession,
  ) {
    this.tf = new FieldTransform(session.field);
    const ctx = this.canvas.getContext('2d');
    if (!ctx) {
      throw new Error('canvas 2d context unavailable');
    }
    this.ctx = ctx;
    this.canvas.width = this.tf.canvasWidth;
    this.canvas.height = this.tf.canvasHeight;
  }

  static async boot(): Promise<App> {
    const api = new HttpApi();
    const app = new App(api, await AnnotatorSession.open(api));
    await app.refreshContexts();
    await app.refreshTraces();
    app.wire();
    app.renderSnapshots();
    app.render();
    return app;
  }

  // -- server-derived panels ----------------------------------------------

  private async refreshContexts(): Promise<void> {
    const info = await this.api.getContexts();
    const current = this.contextSelect.value;
    this.contextSelect.innerHTML = '';
    for (const name of info.graphs) {
      const opt = document.createElement('option');
      opt.value = name;
      opt.textContent = info.trained.includes(name) ? `${name} (trained)` : name;
      this.contextSelect.appendChild(opt);
    }
    if (info.graphs.includes(current)) {
      this.contextSelect.value = current;
    }
    const context = this.contextSelect.value;
    if (context && (this.overlay === null || this.overlay.activeContext !== context)) {
      this.overlay = new PredictionOverlay(this.api, context, () => {
        this.updateOverlayHint();
        this.render();
      });
      this.overlay.ballMoved(this.session.ball());
    }
    this.updateOverlayHint();
  }

  private async refreshTraces(): Promise<void> {
    const project = await this.api.getProject();
    const current = this.traceSelect.value;
    this.traceSelect.innerHTML = '<option value="">(none)</option>';
    for (const run of project.traces) {
      const opt = document.createElement('option');
      opt.value = run;
      opt.textContent = run;
      this.traceSelect.appendChild(opt);
    }
    this.traceSelect.value = project.traces.includes(current) ? current : '';
  }

  private renderSnapshots(): void {
    this.snapshotList.innerHTML = '';
    this.session.snapshots.forEach((_, i) => {
      const item = document.createElement('div');
      item.className = 'item';
      if (this.session.currentIndex === i) {
        item.classList.add('active');
      }
      item.textContent = `snapshot ${i}`;
      item.addEventListener('click', () => {
        this.guarded(() => {
          this.session.openSnapshot(i);
          this.leavePlayback();
          setStatus(this.saveStatus, `opened snapshot ${i}`);
        });
      });
      this.snapshotList.appendChild(item);
    });
  }

  private updateOverlayHint(): void {
    if (!this.overlay) {
      setStatus(this.overlayHint, 'no dependency graphs in this project', true);
    } else if (!this.overlay.enabled) {
      setStatus(this.overlayHint, this.overlay.hint ?? '', true);
    } else {
      setStatus(this.overlayHint, this.overlay.targets ? 'prediction overlay live' : '');
    }
  }

  // -- actions -------------------------------------------------------------

  /** Run an action that refuses to drop edits; offer the save/discard choice. */
  private guarded(action: () => void): void {
    try {
      action();
    } catch (err) {
      if (err instanceof UnsavedChanges) {
        if (window.confirm('Discard unsaved changes?')) {
          this.session.discard();
          action();
        }
      } else {
        throw err;
      }
    }
    this.renderSnapshots();
    this.render();
  }

  private async save(): Promise<void> {
    try {
      const index = await this.session.save();
      setStatus(this.saveStatus, `saved snapshot ${index}`);
    } catch (err) {
      if (err instanceof ApiError) {
        setStatus(this.saveStatus, `${err.code}: ${err.message}`, true);
      } else {
        setStatus(this.saveStatus, String(err), true);
      }
    }
    this.renderSnapshots();
    this.render();
  }

  private async train(): Promise<void> {
    const context = this.contextSelect.value;
    if (!context || this.pollTimer !== null) {
      return;
    }
    try {
      await this.api.startTraining(context);
    } catch (err) {
      setStatus(this.trainStatus, err instanceof ApiError ? err.message : String(err), true);
      return;
    }
    setStatus(this.trainStatus, `training ${context}...`);
    el<HTMLButtonElement>('train-button').disabled = true;
    this.pollTimer = setInterval(() => {
      void this.pollTraining();
    }, 500);
  }

  private async pollTraining(): Promise<void> {
    const status = await this.api.trainStatus();
    if (status.busy) {
      return;
    }
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
    el<HTMLButtonElement>('train-button').disabled = false;
    const last = status.jobs[status.jobs.length - 1];
    if (last && last.state === 'failed') {
      setStatus(this.trainStatus, last.error ?? 'training failed', true);
    } else {
      setStatus(this.trainStatus, 'training done');
      this.overlay?.refresh();
    }
    await this.refreshContexts();
  }

  private adoptPrediction(): void {
    const targets = this.overlay?.targets;
    if (!targets) {
      setStatus(this.saveStatus, 'no prediction to adopt yet', true);
      return;
    }
    this.guarded(() => {
      this.session.adoptPrediction(this.session.ball(), targets);
      this.leavePlayback();
      setStatus(this.saveStatus, 'prediction loaded into a new snapshot; save to keep it');
    });
  }

  private async openTrace(run: string): Promise<void> {
    if (!run) {
      this.leavePlayback();
      this.render();
      return;
    }
    try {
      const doc = await this.api.getTrace(run);
      this.playback = new TracePlayback(doc, () => {
        this.scrubber.value = String(this.playback?.position ?? 0);
        this.updateTraceStatus();
        this.render();
      });
      this.scrubber.max = String(this.playback.length - 1);
      this.scrubber.value = '0';
      this.updateTraceStatus();
    } catch (err) {
      setStatus(this.traceStatus, err instanceof ApiError ? err.message : String(err), true);
      this.playback = null;
    }
    this.render();
  }

  private leavePlayback(): void {
    this.playback?.pause();
    this.playback = null;
    this.traceSelect.value = '';
    setStatus(this.traceStatus, '');
  }

  private updateTraceStatus(): void {
    if (!this.playback) {
      return;
    }
    const r = this.playback.current;
    const chaser = r.chaser ? `, chaser ${r.chaser}` : '';
    setStatus(this.traceStatus,
      `cycle ${r.cycle}/${this.playback.length - 1}, context ${r.context}${chaser}`);
  }

  // -- input wiring --------------------------------------------------------

  private wire(): void {
    el<HTMLButtonElement>('new-snapshot').addEventListener('click', () => {
      this.guarded(() => {
        this.session.newSnapshot();
        this.leavePlayback();
        setStatus(this.saveStatus, 'new snapshot');
      });
    });
    el<HTMLButtonElement>('save-snapshot').addEventListener('click', () => {
      void this.save();
    });
    el<HTMLButtonElement>('discard-snapshot').addEventListener('click', () => {
      this.session.discard();
      this.renderSnapshots();
      this.render();
    });
    el<HTMLButtonElement>('train-button').addEventListener('click', () => {
      void this.train();
    });
    el<HTMLButtonElement>('adopt-button').addEventListener('click', () => {
      this.adoptPrediction();
    });
    el<HTMLButtonElement>('close-trace').addEventListener('click', () => {
      this.leavePlayback();
      this.render();
    });
    this.contextSelect.addEventListener('change', () => {
      this.overlay?.setContext(this.contextSelect.value);
    });
    this.traceSelect.addEventListener('change', () => {
      void this.openTrace(this.traceSelect.value);
    });
    this.scrubber.addEventListener('input', () => {
      this.playback?.seek(Number(this.scrubber.value));
    });
    el<HTMLButtonElement>('play-button').addEventListener('click', () => {
      this.playback?.toggle();
    });
    this.trailsToggle.addEventListener('change', () => {
      if (this.playback) {
        this.playback.trails = this.trailsToggle.checked;
      }
      this.render();
    });

    this.canvas.addEventListener('pointerdown', (ev) => this.onPointerDown(ev));
    this.canvas.addEventListener('pointermove', (ev) => this.onPointerMove(ev));
    this.canvas.addEventListener('pointerup', () => {
      this.dragging = null;
    });
    window.addEventListener('keydown', (ev) => this.onKey(ev));
  }

  private pointerPixels(ev: PointerEvent): Point {
    const rect = this.canvas.getBoundingClientRect();
    return { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
  }

  private onPointerDown(ev: PointerEvent): void {
    if (this.playback) {
      return;
    }
    const hit = hitTest(this.tf, this.markers(), this.pointerPixels(ev));
    if (hit) {
      this.dragging = hit;
      this.selected = hit;
      this.canvas.setPointerCapture(ev.pointerId);
      this.render();
    }
  }

  private onPointerMove(ev: PointerEvent): void {
    if (!this.dragging || this.playback) {
      return;
    }
    const m = this.tf.toMeters(this.tf.clampPixels(this.pointerPixels(ev)));
    if (this.dragging === 'ball') {
      this.session.moveBall(m);
      this.overlay?.ballMoved(m);
    } else {
      this.session.moveAgent(this.dragging, m);
    }
    this.render();
  }

  private rezoom(factor: number): void {
    this.tf = this.tf.zoomed(factor);
    this.canvas.width = this.tf.canvasWidth;
    this.canvas.height = this.tf.canvasHeight;
    this.render();
  }

  private onKey(ev: KeyboardEvent): void {
    if (ev.target instanceof HTMLInputElement || ev.target instanceof HTMLSelectElement) {
      return;
    }
    if (ev.key === '+' || ev.key === '=') {
      this.rezoom(1.25);
      ev.preventDefault();
      return;
    }
    if (ev.key === '-') {
      this.rezoom(0.8);
      ev.preventDefault();
      return;
    }
    if (this.playback) {
      if (ev.key === 'ArrowLeft') {
        this.playback.step(-1);
      } else if (ev.key === 'ArrowRight') {
        this.playback.step(1);
      } else if (ev.key === ' ') {
        this.playback.toggle();
      } else {
        return;
      }
      ev.preventDefault();
      return;
    }
    const steps: Record<string, [number, number]> = {
      ArrowLeft: [-1, 0],
      ArrowRight: [1, 0],
      ArrowUp: [0, 1],
      ArrowDown: [0, -1],
    };
    const step = steps[ev.key];
    if (step && this.selected) {
      this.session.nudge(this.selected, step[0], step[1]);
      if (this.selected === 'ball') {
        this.overlay?.ballMoved(this.session.ball());
      }
      ev.preventDefault();
      this.render();
    }
  }

  // -- drawing -------------------------------------------------------------

  private markers(): SceneMarkers {
    if (this.playback) {
      const r = this.playback.current;
      const agents = new Map<string, Point>();
      for (const id of this.playback.trace.agent_ids) {
        const [x, y] = r.actual[id];
        agents.set(id, { x, y });
      }
      const trails = this.playback.trails
        ? [
            ...this.playback.trace.agent_ids.map((id, i) => ({
              color: agentColor(i),
              points: this.playback!.trail(id),
            })),
            { color: 'rgba(255, 255, 255, 0.7)', points: this.playback.ballTrail() },
          ]
        : [];
      return {
        ball: { x: r.ball[0], y: r.ball[1] },
        agents,
        overlay: r.targets,
        selected: null,
        trails,
      };
    }
    const agents = new Map<string, Point>();
    for (const id of this.session.agentIds) {
      agents.set(id, this.session.target(id));
    }
    return {
      ball: this.session.hasBall ? this.session.ball() : null,
      agents,
      overlay: this.overlay?.targets ?? null,
      selected: this.selected,
      trails: [],
    };
  }

  private render(): void {
    drawScene(this.ctx, this.tf, this.markers());
  }
}

App.boot().catch((err) => {
  document.body.textContent = `failed to start: ${err}`;
  console.error(err);
});
