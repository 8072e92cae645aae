#!/usr/bin/env node
/**
 * boxplan-plot: learning-curve figures from harness curve CSVs.
 *
 *   boxplan-plot --spec figure.json
 *   boxplan-plot a.csv b.csv --labels "box,q-learning" --out fig.svg
 *                [--baseline qlearning.csv] [--title ...] [--format svg|png]
 */
import { parseArgs } from "node:util";

import { loadSpec, renderCurves, PlotSpec } from "./plot.js";

export async function main(argv: string[]): Promise<number> {
  const { values, positionals } = parseArgs({
    args: argv,
    allowPositionals: true,
    options: {
      spec: { type: "string" },
      labels: { type: "string" },
      baseline: { type: "string" },
      out: { type: "string" },
      title: { type: "string" },
      format: { type: "string", default: "svg" },
    },
  });

  let spec: PlotSpec;
  if (values.spec) {
    spec = loadSpec(values.spec);
  } else {
    if (positionals.length === 0 || !values.out) {
      console.error("usage: boxplan-plot --spec <file> | <csv...> --labels a,b --out fig.svg");
      return 2;
    }
    const labels = (values.labels ?? "").split(",").filter((s) => s.length > 0);
    if (labels.length !== positionals.length) {
      console.error(
        `--labels must name each CSV: got ${labels.length} labels for ${positionals.length} files`
      );
      return 2;
    }
    spec = {
      series: positionals.map((csv, i) => ({ csv, label: labels[i] })),
      baseline: values.baseline,
      title: values.title,
      out: values.out,
    };
  }

  const format = values.format === "png" ? "png" : "svg";
  try {
    const out = await renderCurves(spec, format);
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
