/**
 * Telemetry panel rendering: status text fields, a stale-data badge when
 * records stop, and a top-down canvas trace of the recent base positions.
 */

import { UiStore } from "./state.js";

export interface PanelElements {
  status: HTMLElement;
  movement: HTMLElement;
  mode: HTMLElement;
  heading: HTMLElement;
  speed: HTMLElement;
  height: HTMLElement;
  fps: HTMLElement;
  renderFps: HTMLElement;
  stale: HTMLElement;
  drops: HTMLElement;
}

export function describeMovement(held: ReadonlySet<string>): string {
  const parts: string[] = [];
  if (held.has("W")) parts.push("forward");
  if (held.has("S")) parts.push("backward");
  if (held.has(",")) parts.push("strafe-left");
  if (held.has(".")) parts.push("strafe-right");
  if (held.has("A")) parts.push("turn-left");
  if (held.has("D")) parts.push("turn-right");
  return parts.length ? parts.join("+") : "none";
}

export function updatePanel(
  el: PanelElements, store: UiStore, held: ReadonlySet<string>,
  renderFps: number, drops: number, now: number,
): void {
  const s = store.lastState;
  el.status.textContent = s ? s.status : "-";
  el.movement.textContent = describeMovement(held);
  el.mode.textContent = s ? `${s.mode_name} (#${s.mode})` : "-";
  el.heading.textContent = s ? `${s.heading_deg.toFixed(1)} deg` : "-";
  el.speed.textContent = s ? `${s.speed.toFixed(2)} m/s` : "-";
  el.height.textContent = s ? `${s.height.toFixed(2)} m` : "-";
  el.fps.textContent = s ? s.fps.toFixed(1) : "-";
  el.renderFps.textContent = renderFps.toFixed(0);
  el.stale.hidden = !store.isStale(now);
  el.drops.textContent = drops > 0 ? `${drops} dropped` : "";
}

/** Draw the XY trace top-down, newest point marked with a heading arrow. */
export function drawTrace(canvas: HTMLCanvasElement, store: UiStore): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#444";
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
  const trace = store.trace;
  if (trace.length === 0) return;

  let minX = trace[0][0], maxX = trace[0][0];
  let minY = trace[0][1], maxY = trace[0][1];
  for (const [x, y] of trace) {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  }
  const span = Math.max(maxX - minX, maxY - minY, 1.0);
  const margin = 20;
  const scale = (Math.min(width, height) - 2 * margin) / span;
  const cx = (minX + maxX) / 2, cy = (minY + maxY) / 2;
  // robot frame: +x up the screen, +y to the left
  const toPx = (x: number, y: number): [number, number] => [
    width / 2 - (y - cy) * scale,
    height / 2 - (x - cx) * scale,
  ];

  ctx.strokeStyle = "#4da3ff";
  ctx.lineWidth = 2;
  ctx.beginPath();
  trace.forEach(([x, y], i) => {
    const [px, py] = toPx(x, y);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();

  const [hx, hy] = trace[trace.length - 1];
  const [px, py] = toPx(hx, hy);
  const arrow = 12;
  const a = store.lastHeading;
  ctx.strokeStyle = "#ffb347";
  ctx.beginPath();
  ctx.moveTo(px, py);
  ctx.lineTo(px - Math.sin(a) * arrow, py - Math.cos(a) * arrow);
  ctx.stroke();
  ctx.fillStyle = "#ffb347";
  ctx.beginPath();
  ctx.arc(px, py, 4, 0, 2 * Math.PI);
  ctx.fill();
}
