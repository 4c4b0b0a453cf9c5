/** Minimal streaming line chart for one metric series. */

import { MetricSeries } from "./series.js";

export function drawSeries(canvas: HTMLCanvasElement, series: MetricSeries,
                           color = "#6cf"): void {
  const ctx = canvas.getContext("2d")!;
  const w = canvas.width;
  const h = canvas.height;
  ctx.fillStyle = "#111";
  ctx.fillRect(0, 0, w, h);
  const points = series.window();
  if (points.length === 0) return;
  const b = series.bounds();
  const sx = (tick: number) => ((tick - b.tickMin) / (b.tickMax - b.tickMin)) * (w - 8) + 4;
  const sy = (v: number) => h - 4 - ((v - b.valueMin) / (b.valueMax - b.valueMin)) * (h - 8);
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(sx(points[0].tick), sy(points[0].value));
  for (const p of points) {
    ctx.lineTo(sx(p.tick), sy(p.value));
  }
  ctx.stroke();
  ctx.fillStyle = "#9a9";
  ctx.font = "10px monospace";
  const last = series.latest()!;
  ctx.fillText(`${series.name}: ${last.value.toPrecision(5)}`, 6, 12);
}
