/** Bounded per-metric time series feeding the live charts. */

export interface SeriesPoint {
  tick: number;
  value: number;
}

export class MetricSeries {
  private points: SeriesPoint[] = [];

  constructor(public readonly name: string, public readonly capacity = 2000) {}

  push(tick: number, value: number): void {
    this.points.push({ tick, value });
    if (this.points.length > this.capacity) {
      this.points.splice(0, this.points.length - this.capacity);
    }
  }

  get length(): number {
    return this.points.length;
  }

  window(): SeriesPoint[] {
    return this.points;
  }

  latest(): SeriesPoint | undefined {
    return this.points[this.points.length - 1];
  }

  bounds(): { tickMin: number; tickMax: number; valueMin: number; valueMax: number } {
    if (this.points.length === 0) {
      return { tickMin: 0, tickMax: 1, valueMin: 0, valueMax: 1 };
    }
    let valueMin = Infinity;
    let valueMax = -Infinity;
    for (const p of this.points) {
      if (p.value < valueMin) valueMin = p.value;
      if (p.value > valueMax) valueMax = p.value;
    }
    if (valueMin === valueMax) {
      valueMin -= 0.5;
      valueMax += 0.5;
    }
    return {
      tickMin: this.points[0].tick,
      tickMax: Math.max(this.points[this.points.length - 1].tick, this.points[0].tick + 1),
      valueMin,
      valueMax,
    };
  }

  clear(): void {
    this.points = [];
  }
}

export class SeriesStore {
  private series = new Map<string, MetricSeries>();

  constructor(public readonly capacity = 2000) {}

  ingest(tick: number, values: Record<string, number | null>): void {
    for (const [name, value] of Object.entries(values)) {
      if (value === null || value === undefined) continue;
      let s = this.series.get(name);
      if (!s) {
        s = new MetricSeries(name, this.capacity);
        this.series.set(name, s);
      }
      s.push(tick, value);
    }
  }

  names(): string[] {
    return [...this.series.keys()];
  }

  get(name: string): MetricSeries | undefined {
    return this.series.get(name);
  }

  clear(): void {
    this.series.clear();
  }
}
