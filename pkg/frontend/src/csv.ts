/**
 * Strict readers for the harness CSV schemas.
 *
 * Curve tables carry `episode,mean,stderr`; schema violations raise with the
 * offending column named so misrouted files fail loudly.
 */
import fs from "node:fs";

export interface CurvePoint {
  episode: number;
  mean: number;
  stderr: number;
}

export interface Curve {
  label: string;
  points: CurvePoint[];
}

export class SchemaError extends Error {}

const CURVE_COLUMNS = ["episode", "mean", "stderr"] as const;

export function parseCurveCsv(text: string, source: string): CurvePoint[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${source}: empty CSV`);
  }
  const header = lines[0].split(",").map((c) => c.trim());
  for (const required of CURVE_COLUMNS) {
    if (!header.includes(required)) {
      throw new SchemaError(`${source}: missing column '${required}' (got: ${header.join(", ")})`);
    }
  }
  const index = Object.fromEntries(CURVE_COLUMNS.map((c) => [c, header.indexOf(c)]));
  const points: CurvePoint[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    const row: Record<string, number> = {};
    for (const column of CURVE_COLUMNS) {
      const value = Number(cells[index[column]]);
      if (!Number.isFinite(value)) {
        throw new SchemaError(`${source}: row ${i}: column '${column}' is not numeric`);
      }
      row[column] = value;
    }
    points.push({ episode: row.episode, mean: row.mean, stderr: row.stderr });
  }
  return points;
}

export function readCurve(path: string, label: string): Curve {
  return { label, points: parseCurveCsv(fs.readFileSync(path, "utf-8"), path) };
}

/** All curves in one figure must share the episode axis. */
export function assertSharedEpisodeAxis(curves: Curve[]): void {
  if (curves.length < 2) return;
  const first = curves[0].points.map((p) => p.episode);
  for (const curve of curves.slice(1)) {
    const axis = curve.points.map((p) => p.episode);
    if (axis.length !== first.length || axis.some((e, i) => e !== first[i])) {
      throw new SchemaError(
        `curve '${curve.label}' does not share the episode axis of '${curves[0].label}'`
      );
    }
  }
}
