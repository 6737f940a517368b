import type { Pair, TraceDocument, TraceRecord } from './types';

/**
 * Scrubber over a simulation trace. Holds no API handle at all: replay is
 * strictly read-only and works entirely from the loaded document.
 */
export class TracePlayback {
  trails = true;

  private index = 0;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    readonly trace: TraceDocument,
    private readonly onChange: () => void = () => {},
    private readonly intervalMs = 50,
  ) {
    if (trace.records.length === 0) {
      throw new Error('trace has no records');
    }
  }

  /** One scrubber step per recorded cycle. */
  get length(): number {
    return this.trace.records.length;
  }

  get position(): number {
    return this.index;
  }

  get current(): TraceRecord {
    return this.trace.records[this.index];
  }

  get playing(): boolean {
    return this.timer !== null;
  }

  seek(i: number): void {
    this.index = Math.min(Math.max(i, 0), this.length - 1);
    this.onChange();
  }

  step(di = 1): void {
    this.seek(this.index + di);
  }

  play(): void {
    if (this.timer !== null) {
      return;
    }
    this.timer = setInterval(() => {
      if (this.index >= this.length - 1) {
        this.pause();
      } else {
        this.step(1);
      }
    }, this.intervalMs);
    this.onChange();
  }

  pause(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
      this.onChange();
    }
  }

  toggle(): void {
    if (this.playing) {
      this.pause();
    } else {
      if (this.index >= this.length - 1) {
        this.seek(0);
      }
      this.play();
    }
  }

  /** Path of one agent from its start position up to the scrubber. */
  trail(agentId: string, upTo = this.index): Pair[] {
    const start = this.trace.start[agentId];
    if (!start) {
      throw new Error(`unknown agent ${agentId}`);
    }
    const points: Pair[] = [start];
    for (let i = 0; i <= upTo && i < this.length; i++) {
      points.push(this.trace.records[i].actual[agentId]);
    }
    return points;
  }

  ballTrail(upTo = this.index): Pair[] {
    const points: Pair[] = [this.trace.ball_start];
    for (let i = 0; i <= upTo && i < this.length; i++) {
      points.push(this.trace.records[i].ball);
    }
    return points;
  }
}
