import type { FieldSize, Point } from './types';

// Pixels per meter at default zoom. Mouse positions arrive as whole pixels,
// so a click is off by up to half a pixel per axis; at 15 px/m the worst
// Euclidean error is sqrt(2)/30 ~ 0.047 m, inside the 0.05 m placement
// tolerance the tool promises.
export const DEFAULT_SCALE = 15;

// Margin around the pitch in pixels. Off-field targets are legal in the data
// model, so the draggable area extends a couple of meters past the lines.
export const FIELD_MARGIN = 30;

// Arrow-key nudge step in meters.
export const NUDGE_STEP = 0.1;

/**
 * Affine mapping between field meters and canvas pixels.
 *
 * Field frame: origin at the centre mark, x toward the opponent goal,
 * y toward the left touchline. Canvas frame: origin top-left, y down.
 * The y axis is therefore flipped; x is only shifted and scaled.
 */
export class FieldTransform {
  constructor(
    readonly field: FieldSize,
    readonly scale: number = DEFAULT_SCALE,
    readonly margin: number = FIELD_MARGIN,
  ) {
    if (!(field.length > 0) || !(field.width > 0)) {
      throw new Error(`bad field size ${field.length}x${field.width}`);
    }
    if (!(scale > 0)) {
      throw new Error(`bad scale ${scale}`);
    }
  }

  get canvasWidth(): number {
    return Math.round(this.field.length * this.scale + 2 * this.margin);
  }

  get canvasHeight(): number {
    return Math.round(this.field.width * this.scale + 2 * this.margin);
  }

  toPixels(m: Point): Point {
    return {
      x: this.margin + (m.x + this.field.length / 2) * this.scale,
      y: this.margin + (this.field.width / 2 - m.y) * this.scale,
    };
  }

  toMeters(px: Point): Point {
    return {
      x: (px.x - this.margin) / this.scale - this.field.length / 2,
      y: this.field.width / 2 - (px.y - this.margin) / this.scale,
    };
  }

  /** Keep a pointer position inside the drawable area. */
  clampPixels(px: Point): Point {
    return {
      x: Math.min(Math.max(px.x, 0), this.canvasWidth),
      y: Math.min(Math.max(px.y, 0), this.canvasHeight),
    };
  }

  zoomed(factor: number): FieldTransform {
    return new FieldTransform(this.field, this.scale * factor, this.margin);
  }
}

export function dist(a: Point, b: Point): number {
  return Math.hypot(a.x - b.x, a.y - b.y);
}
