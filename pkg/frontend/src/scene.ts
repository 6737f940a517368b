import { FieldTransform, dist } from './transform';
import type { Pair, Point } from './types';

export const MARKER_RADIUS = 9; // px
const HIT_SLACK = 4; // extra px around a marker that still grabs it

const AGENT_COLORS = [
  '#2563eb', '#0891b2', '#7c3aed', '#db2777', '#ea580c',
  '#65a30d', '#0d9488', '#9333ea', '#c026d3', '#dc2626', '#ca8a04',
];

export function agentColor(i: number): string {
  return AGENT_COLORS[i % AGENT_COLORS.length];
}

export interface Trail {
  color: string;
  points: Pair[];
}

export interface SceneMarkers {
  ball: Point | null;
  agents: Map<string, Point>;
  /** Predicted or replayed targets drawn as hollow rings. */
  overlay: Record<string, Pair> | null;
  /** Marker that keyboard nudges move: 'ball' or an agent id. */
  selected: string | null;
  trails: Trail[];
}

function line(ctx: CanvasRenderingContext2D, a: Point, b: Point): void {
  ctx.beginPath();
  ctx.moveTo(a.x, a.y);
  ctx.lineTo(b.x, b.y);
  ctx.stroke();
}

function circle(ctx: CanvasRenderingContext2D, c: Point, r: number): void {
  ctx.beginPath();
  ctx.arc(c.x, c.y, r, 0, Math.PI * 2);
  ctx.stroke();
}

export function drawField(ctx: CanvasRenderingContext2D, tf: FieldTransform): void {
  const { length, width } = tf.field;
  ctx.fillStyle = '#1a5c33';
  ctx.fillRect(0, 0, tf.canvasWidth, tf.canvasHeight);

  ctx.strokeStyle = 'rgba(255, 255, 255, 0.85)';
  ctx.lineWidth = 1.5;

  const tl = tf.toPixels({ x: -length / 2, y: width / 2 });
  const br = tf.toPixels({ x: length / 2, y: -width / 2 });
  ctx.strokeRect(tl.x, tl.y, br.x - tl.x, br.y - tl.y);

  // halfway line and centre circle
  line(ctx, tf.toPixels({ x: 0, y: width / 2 }), tf.toPixels({ x: 0, y: -width / 2 }));
  circle(ctx, tf.toPixels({ x: 0, y: 0 }), 9.15 * tf.scale * (length / 105));

  // penalty and goal areas, scaled from the regulation pitch
  const penD = length * (16.5 / 105);
  const penW = width * (40.3 / 68);
  const goalD = length * (5.5 / 105);
  const goalW = width * (18.3 / 68);
  for (const side of [-1, 1]) {
    for (const [d, w] of [[penD, penW], [goalD, goalW]]) {
      const near = tf.toPixels({ x: side * length / 2, y: w / 2 });
      const far = tf.toPixels({ x: side * (length / 2 - d), y: -w / 2 });
      ctx.strokeRect(Math.min(near.x, far.x), Math.min(near.y, far.y),
        Math.abs(far.x - near.x), Math.abs(far.y - near.y));
    }
  }
}

function drawMarker(
  ctx: CanvasRenderingContext2D,
  px: Point,
  color: string,
  label: string,
  selected: boolean,
): void {
  ctx.beginPath();
  ctx.arc(px.x, px.y, MARKER_RADIUS, 0, Math.PI * 2);
  ctx.fillStyle = color;
  ctx.fill();
  ctx.lineWidth = selected ? 3 : 1.5;
  ctx.strokeStyle = selected ? '#fbbf24' : 'rgba(0, 0, 0, 0.55)';
  ctx.stroke();
  if (label) {
    ctx.fillStyle = '#ffffff';
    ctx.font = '10px sans-serif';
    ctx.textAlign = 'center';
    ctx.textBaseline = 'middle';
    ctx.fillText(label, px.x, px.y);
  }
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  tf: FieldTransform,
  markers: SceneMarkers,
): void {
  drawField(ctx, tf);

  for (const trail of markers.trails) {
    if (trail.points.length < 2) {
      continue;
    }
    ctx.strokeStyle = trail.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    trail.points.forEach(([x, y], i) => {
      const px = tf.toPixels({ x, y });
      if (i === 0) {
        ctx.moveTo(px.x, px.y);
      } else {
        ctx.lineTo(px.x, px.y);
      }
    });
    ctx.stroke();
  }

  if (markers.overlay) {
    ctx.setLineDash([4, 3]);
    for (const [id, [x, y]] of Object.entries(markers.overlay)) {
      const px = tf.toPixels({ x, y });
      ctx.strokeStyle = '#fde047';
      ctx.lineWidth = 2;
      circle(ctx, px, MARKER_RADIUS + 2);
      ctx.fillStyle = '#fde047';
      ctx.font = '9px sans-serif';
      ctx.textAlign = 'center';
      ctx.textBaseline = 'top';
      ctx.fillText(id, px.x, px.y + MARKER_RADIUS + 4);
    }
    ctx.setLineDash([]);
  }

  let i = 0;
  for (const [id, p] of markers.agents) {
    drawMarker(ctx, tf.toPixels(p), agentColor(i), id, markers.selected === id);
    i += 1;
  }

  if (markers.ball) {
    drawMarker(ctx, tf.toPixels(markers.ball), '#f97316', '', markers.selected === 'ball');
  }
}

/**
 * Which marker is under the pointer? The ball wins ties so it stays
 * grabbable when a prediction ring sits on top of it.
 */
export function hitTest(
  tf: FieldTransform,
  markers: SceneMarkers,
  px: Point,
): 'ball' | string | null {
  const reach = MARKER_RADIUS + HIT_SLACK;
  if (markers.ball && dist(tf.toPixels(markers.ball), px) <= reach) {
    return 'ball';
  }
  let best: string | null = null;
  let bestDist = reach;
  for (const [id, p] of markers.agents) {
    const d = dist(tf.toPixels(p), px);
    if (d <= bestDist) {
      best = id;
      bestDist = d;
    }
  }
  return best;
}
