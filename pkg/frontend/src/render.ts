/** Canvas rendering of world frames: patches, links, agent glyphs. */

import { FrameMessage } from "./protocol.js";
import { ViewTransform, colorToCss, glyphPoints } from "./transform.js";

export class WorldRenderer {
  private patchCanvas: HTMLCanvasElement;
  private patchCtx: CanvasRenderingContext2D;
  private worldW = 1;
  private worldH = 1;

  constructor(private canvas: HTMLCanvasElement) {
    this.patchCanvas = document.createElement("canvas");
    this.patchCtx = this.patchCanvas.getContext("2d")!;
  }

  setWorld(width: number, height: number): void {
    this.worldW = width;
    this.worldH = height;
    this.patchCanvas.width = width;
    this.patchCanvas.height = height;
    this.patchCtx.fillStyle = colorToCss(0);
    this.patchCtx.fillRect(0, 0, width, height);
  }

  private transform(): ViewTransform {
    return new ViewTransform(
      { width: this.worldW, height: this.worldH },
      this.canvas.width,
      this.canvas.height,
    );
  }

  /** Repaint changed patches into the offscreen grid, then draw the scene. */
  render(frame: FrameMessage): void {
    const halfW = Math.floor(this.worldW / 2);
    const halfH = Math.floor(this.worldH / 2);
    for (const [px, py, color] of frame.patches) {
      this.patchCtx.fillStyle = colorToCss(color);
      this.patchCtx.fillRect(px + halfW, this.worldH - 1 - (py + halfH), 1, 1);
    }
    const ctx = this.canvas.getContext("2d")!;
    const t = this.transform();
    ctx.fillStyle = "#000";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    const [ox, oy] = t.toScreen(-this.worldW / 2, this.worldH / 2);
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(this.patchCanvas, ox, oy, this.worldW * t.scale, this.worldH * t.scale);

    const pos = new Map<number, [number, number]>();
    for (const agent of frame.agents) {
      pos.set(agent[0], t.toScreen(agent[2], agent[3]));
    }
    ctx.strokeStyle = "rgba(200, 200, 200, 0.45)";
    ctx.lineWidth = 1;
    for (const [a, b] of frame.links) {
      const pa = pos.get(a);
      const pb = pos.get(b);
      if (!pa || !pb) continue;
      ctx.beginPath();
      ctx.moveTo(pa[0], pa[1]);
      ctx.lineTo(pb[0], pb[1]);
      ctx.stroke();
    }
    const size = t.glyphSize();
    for (const [id, breed, x, y, heading, color] of frame.agents) {
      const [sx, sy] = pos.get(id)!;
      ctx.fillStyle = colorToCss(color);
      if (breed === "tower" || breed === "sensor") {
        ctx.fillRect(sx - size, sy - size, size * 2, size * 2);
        ctx.strokeStyle = "#fff";
        ctx.strokeRect(sx - size, sy - size, size * 2, size * 2);
        continue;
      }
      const pts = glyphPoints(heading, size);
      ctx.beginPath();
      ctx.moveTo(sx + pts[0][0], sy + pts[0][1]);
      ctx.lineTo(sx + pts[1][0], sy + pts[1][1]);
      ctx.lineTo(sx + pts[2][0], sy + pts[2][1]);
      ctx.closePath();
      ctx.fill();
      void x; void y;
    }
  }
}
