/** World-to-screen mapping and the color-scale-to-CSS mapping. */

export interface WorldDims {
  width: number;
  height: number;
}

export class ViewTransform {
  constructor(
    public world: WorldDims,
    public screenW: number,
    public screenH: number,
  ) {}

  get scale(): number {
    return Math.min(this.screenW / this.world.width, this.screenH / this.world.height);
  }

  /** World origin is the center; screen y grows downward. */
  toScreen(x: number, y: number): [number, number] {
    return [
      this.screenW / 2 + x * this.scale,
      this.screenH / 2 - y * this.scale,
    ];
  }

  toWorld(sx: number, sy: number): [number, number] {
    return [
      (sx - this.screenW / 2) / this.scale,
      (this.screenH / 2 - sy) / this.scale,
    ];
  }

  glyphSize(): number {
    return Math.max(3, this.scale * 0.45);
  }
}

// 14 hue families over [0, 140); family 0 is the gray ramp.
const FAMILY_HUES = [0, 0, 12, 30, 20, 55, 120, 90, 170, 190, 205, 225, 265, 300];
const FAMILY_SATURATION = [0, 85, 90, 65, 95, 90, 80, 85, 75, 85, 90, 85, 80, 85];
const EXTRA_HUE = 330; // family 13 (pink) band

/**
 * Map a simulator color in [0, 140) to CSS.  Hue comes from the family
 * (floor(color/10)), lightness from the shade position within the family,
 * so every value is total and tower palette entries stay visibly distinct.
 */
export function colorToCss(color: number): string {
  const c = ((color % 140) + 140) % 140;
  const family = Math.floor(c / 10);
  const shade = c - family * 10; // 0..10
  const lightness = 8 + (shade / 10) * 84;
  if (family === 0) {
    return `hsl(0, 0%, ${lightness.toFixed(1)}%)`;
  }
  const hue = family < FAMILY_HUES.length ? FAMILY_HUES[family] : EXTRA_HUE;
  const saturation = family < FAMILY_SATURATION.length ? FAMILY_SATURATION[family] : 80;
  return `hsl(${hue}, ${saturation}%, ${lightness.toFixed(1)}%)`;
}

/** Triangle glyph corner offsets for an agent pointing along its heading. */
export function glyphPoints(heading: number, size: number): [number, number][] {
  // heading 0 = north, clockwise; screen y grows downward
  const rad = (heading * Math.PI) / 180;
  const dir: [number, number] = [Math.sin(rad), -Math.cos(rad)];
  const left: [number, number] = [-dir[1], dir[0]];
  return [
    [dir[0] * size, dir[1] * size],
    [-dir[0] * size * 0.7 + left[0] * size * 0.6, -dir[1] * size * 0.7 + left[1] * size * 0.6],
    [-dir[0] * size * 0.7 - left[0] * size * 0.6, -dir[1] * size * 0.7 - left[1] * size * 0.6],
  ];
}
