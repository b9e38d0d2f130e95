// Fixed-capacity strip-chart series and scaling. Drawing is a thin canvas
// pass in main.ts; everything with logic lives here.

export interface Series {
  name: string;
  color: string;
  t: number[];
  v: number[];
}

export class StripChart {
  readonly capacity: number;
  readonly series: Series[];

  constructor(capacity: number, specs: { name: string; color: string }[]) {
    if (capacity < 2) throw new Error("capacity must be >= 2");
    this.capacity = capacity;
    this.series = specs.map((s) => ({ ...s, t: [], v: [] }));
  }

  push(t: number, values: number[]): void {
    if (values.length !== this.series.length) {
      throw new Error("value count does not match series count");
    }
    this.series.forEach((s, i) => {
      s.t.push(t);
      s.v.push(values[i]);
      if (s.t.length > this.capacity) {
        s.t.shift();
        s.v.shift();
      }
    });
  }

  clear(): void {
    for (const s of this.series) {
      s.t.length = 0;
      s.v.length = 0;
    }
  }

  /** [min, max] over all finite samples, padded, never degenerate. */
  valueRange(pad = 0.1): [number, number] {
    let lo = Infinity;
    let hi = -Infinity;
    for (const s of this.series) {
      for (const v of s.v) {
        if (Number.isFinite(v)) {
          lo = Math.min(lo, v);
          hi = Math.max(hi, v);
        }
      }
    }
    if (lo > hi) return [0, 1];
    if (lo === hi) return [lo - 0.5, hi + 0.5];
    const span = hi - lo;
    return [lo - pad * span, hi + pad * span];
  }

  timeRange(): [number, number] {
    const ts = this.series[0].t;
    if (ts.length === 0) return [0, 1];
    if (ts.length === 1) return [ts[0], ts[0] + 1];
    return [ts[0], ts[ts.length - 1]];
  }
}

/** Map a (t, v) sample into pixel coordinates for the given ranges. */
export function samplePixel(
  t: number,
  v: number,
  tRange: [number, number],
  vRange: [number, number],
  width: number,
  height: number
): [number, number] {
  const x = ((t - tRange[0]) / (tRange[1] - tRange[0])) * width;
  const y = height - ((v - vRange[0]) / (vRange[1] - vRange[0])) * height;
  return [x, y];
}
