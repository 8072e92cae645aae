/**
 * Smoothed learning-curve figures with shaded standard-error bands.
 *
 * In baseline-differenced mode every curve (including its band) is shifted
 * by the baseline's pointwise mean, so the baseline plotted against itself
 * is an identically zero line.  Rendering is a pure function of the spec
 * and the input tables.
 */
import fs from "node:fs";
import path from "node:path";

import { Curve, SchemaError, assertSharedEpisodeAxis, readCurve } from "./csv.js";
import { PALETTE, bandPath, escapeText, fmt, linearScale, niceTicks, polylinePath } from "./svg.js";

export interface PlotSeriesSpec {
  csv: string;
  label: string;
}

export interface PlotSpec {
  series: PlotSeriesSpec[];
  title?: string;
  /** Path of a curve CSV subtracted pointwise from every series. */
  baseline?: string;
  out: string;
  width?: number;
  height?: number;
  xLabel?: string;
  yLabel?: string;
}

export interface RenderedSeries {
  label: string;
  color: string;
  episodes: number[];
  mean: number[];
  stderr: number[];
}

const MARGIN = { top: 34, right: 16, bottom: 40, left: 56 };

export function loadSpec(specPath: string): PlotSpec {
  const raw = JSON.parse(fs.readFileSync(specPath, "utf-8"));
  if (!Array.isArray(raw.series) || raw.series.length === 0) {
    throw new SchemaError(`${specPath}: 'series' must be a nonempty list`);
  }
  const dir = path.dirname(specPath);
  const resolve = (p: string) => (path.isAbsolute(p) ? p : path.join(dir, p));
  return {
    ...raw,
    series: raw.series.map((s: PlotSeriesSpec) => ({ ...s, csv: resolve(s.csv) })),
    baseline: raw.baseline ? resolve(raw.baseline) : undefined,
    out: resolve(raw.out),
  };
}

export function prepareSeries(spec: PlotSpec): RenderedSeries[] {
  const curves: Curve[] = spec.series.map((s) => readCurve(s.csv, s.label));
  const baseline = spec.baseline ? readCurve(spec.baseline, "baseline") : undefined;
  if (baseline) {
    assertSharedEpisodeAxis([...curves, baseline]);
  } else {
    assertSharedEpisodeAxis(curves);
  }
  return curves.map((curve, i) => ({
    label: curve.label,
    color: PALETTE[i % PALETTE.length],
    episodes: curve.points.map((p) => p.episode),
    mean: curve.points.map((p, j) => p.mean - (baseline ? baseline.points[j].mean : 0)),
    stderr: curve.points.map((p) => p.stderr),
  }));
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

export function renderSvg(spec: PlotSpec, series: RenderedSeries[]): string {
  const width = spec.width ?? 640;
  const height = spec.height ?? 400;
  const innerW = width - MARGIN.left - MARGIN.right;
  const innerH = height - MARGIN.top - MARGIN.bottom;

  const allX = series.flatMap((s) => s.episodes);
  const allY = series.flatMap((s) => [
    ...s.mean.map((m, i) => m - s.stderr[i]),
    ...s.mean.map((m, i) => m + s.stderr[i]),
  ]);
  const [xLo, xHi] = extent(allX);
  let [yLo, yHi] = extent(allY);
  if (yLo === yHi) {
    yLo -= 1;
    yHi += 1;
  }
  const pad = (yHi - yLo) * 0.05;
  const x = linearScale([xLo, xHi], [MARGIN.left, MARGIN.left + innerW]);
  const y = linearScale([yLo - pad, yHi + pad], [MARGIN.top + innerH, MARGIN.top]);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

  for (const tick of niceTicks(x.domain)) {
    const px = fmt(x(tick));
    parts.push(
      `<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${MARGIN.top + innerH}" stroke="#eee"/>`,
      `<text x="${px}" y="${height - MARGIN.bottom + 16}" text-anchor="middle" font-size="11">${tick}</text>`
    );
  }
  for (const tick of niceTicks(y.domain)) {
    const py = fmt(y(tick));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + innerW}" y2="${py}" stroke="#eee"/>`,
      `<text x="${MARGIN.left - 6}" y="${py}" text-anchor="end" dominant-baseline="middle" font-size="11">${tick}</text>`
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${innerW}" height="${innerH}" fill="none" stroke="#333"/>`
  );

  for (const s of series) {
    const xs = s.episodes.map(x);
    const upper = s.mean.map((m, i) => y(m + s.stderr[i]));
    const lower = s.mean.map((m, i) => y(m - s.stderr[i]));
    parts.push(
      `<path class="band" data-label="${escapeText(s.label)}" d="${bandPath(xs, upper, lower)}" ` +
        `fill="${s.color}" fill-opacity="0.18" stroke="none"/>`
    );
    parts.push(
      `<path class="line" data-label="${escapeText(s.label)}" ` +
        `d="${polylinePath(xs, s.mean.map(y))}" fill="none" stroke="${s.color}" stroke-width="1.8"/>`
    );
  }

  if (spec.title) {
    parts.push(
      `<text x="${width / 2}" y="20" text-anchor="middle" font-size="14">${escapeText(spec.title)}</text>`
    );
  }
  parts.push(
    `<text x="${MARGIN.left + innerW / 2}" y="${height - 6}" text-anchor="middle" font-size="12">` +
      `${escapeText(spec.xLabel ?? "episode")}</text>`
  );
  parts.push(
    `<text x="14" y="${MARGIN.top + innerH / 2}" text-anchor="middle" font-size="12" ` +
      `transform="rotate(-90 14 ${MARGIN.top + innerH / 2})">${escapeText(
        spec.yLabel ?? (spec.baseline ? "return minus baseline" : "return")
      )}</text>`
  );

  series.forEach((s, i) => {
    const lx = MARGIN.left + 10;
    const ly = MARGIN.top + 14 + i * 16;
    parts.push(
      `<line class="legend-swatch" x1="${lx}" y1="${ly - 4}" x2="${lx + 18}" y2="${ly - 4}" ` +
        `stroke="${s.color}" stroke-width="2.5"/>`,
      `<text class="legend-label" x="${lx + 24}" y="${ly}" font-size="11">${escapeText(s.label)}</text>`
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}

export async function renderCurves(spec: PlotSpec, format: "svg" | "png" = "svg"): Promise<string> {
  const series = prepareSeries(spec);
  const svg = renderSvg(spec, series);
  if (format === "svg") {
    fs.writeFileSync(spec.out, svg);
    return spec.out;
  }
  let sharp;
  try {
    // @ts-expect-error optional raster backend, resolved at runtime only
    sharp = (await import("sharp")).default;
  } catch {
    throw new Error(
      "raster output needs the optional 'sharp' package (npm install sharp); SVG output has no extra dependency"
    );
  }
  await sharp(Buffer.from(svg)).png().toFile(spec.out);
  return spec.out;
}
