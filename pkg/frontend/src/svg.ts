/** Minimal deterministic SVG assembly: linear scales, nice ticks, paths. */

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

/** Round tick positions covering the domain, roughly `count` of them. */
export function niceTicks([lo, hi]: [number, number], count = 6): number[] {
  if (lo === hi) return [lo];
  const rawStep = (hi - lo) / Math.max(count - 1, 1);
  const magnitude = 10 ** Math.floor(Math.log10(rawStep));
  const residual = rawStep / magnitude;
  const step = (residual >= 5 ? 5 : residual >= 2 ? 2 : 1) * magnitude;
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let t = start; t <= hi + step * 1e-9; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : Number(t.toPrecision(12)));
  }
  return ticks;
}

export function fmt(value: number): string {
  if (!Number.isFinite(value)) throw new Error(`non-finite coordinate ${value}`);
  return Number(value.toFixed(3)).toString();
}

export function polylinePath(xs: number[], ys: number[]): string {
  let d = "";
  for (let i = 0; i < xs.length; i++) {
    d += `${i === 0 ? "M" : "L"}${fmt(xs[i])},${fmt(ys[i])}`;
  }
  return d;
}

/** Closed band: upper edge left-to-right then lower edge right-to-left. */
export function bandPath(xs: number[], upper: number[], lower: number[]): string {
  let d = polylinePath(xs, upper);
  for (let i = xs.length - 1; i >= 0; i--) {
    d += `L${fmt(xs[i])},${fmt(lower[i])}`;
  }
  return d + "Z";
}

export function escapeText(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#ff7f0e",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#7f7f7f",
  "#17becf",
  "#bcbd22",
];
