import { ApiError, type Api } from './api';
import type { Pair, Point } from './types';

/**
 * Live formation preview: as the ball is dragged, fetch the trained model's
 * predicted targets (debounced) and expose them for the overlay layer.
 *
 * Before any model exists the service answers not_found; the overlay then
 * turns itself off with a hint instead of hammering the API, and refresh()
 * re-enables it once a training run completes.
 */
export class PredictionOverlay {
  targets: Record<string, Pair> | null = null;

  private timer: ReturnType<typeof setTimeout> | null = null;
  private lastBall: Point | null = null;
  private disabledHint: string | null = null;
  private seq = 0;

  constructor(
    private readonly api: Api,
    private context: string,
    private readonly onChange: () => void = () => {},
    private readonly delayMs = 150,
  ) {}

  get enabled(): boolean {
    return this.disabledHint === null;
  }

  get hint(): string | null {
    return this.disabledHint;
  }

  get activeContext(): string {
    return this.context;
  }

  setContext(context: string): void {
    this.context = context;
    this.disabledHint = null;
    this.targets = null;
    this.requestNow();
  }

  /** Debounced: rapid drag events collapse into one request for the
   * final position. */
  ballMoved(p: Point): void {
    this.lastBall = { ...p };
    if (!this.enabled) {
      return;
    }
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire();
    }, this.delayMs);
  }

  /** Re-enable after training and request at the last known ball position. */
  refresh(): void {
    this.disabledHint = null;
    this.requestNow();
  }

  private requestNow(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.lastBall !== null) {
      void this.fire();
    }
  }

  private async fire(): Promise<void> {
    const ball = this.lastBall;
    if (ball === null) {
      return;
    }
    const ticket = ++this.seq;
    try {
      const res = await this.api.predict(this.context, ball.x, ball.y);
      if (ticket !== this.seq) {
        return; // a newer request superseded this one
      }
      this.targets = res.targets;
      this.disabledHint = null;
    } catch (err) {
      if (ticket !== this.seq) {
        return;
      }
      this.targets = null;
      this.disabledHint =
        err instanceof ApiError && err.code === 'not_found'
          ? 'no trained model for this context yet'
          : err instanceof Error
            ? err.message
            : String(err);
    }
    this.onChange();
  }
}
