import * as fs from "node:fs";
import * as path from "node:path";

import { listSnapshots, parseDiagnostics, parseSnapshot } from "./csv.js";
import { HEATMAP_FIELDS, renderHeatmap, renderQuiver, renderTimeseries } from "./plots.js";

export interface PlotOptions {
  runDir: string;
  fields: string[];
  quiver: boolean;
  timeseries: string[];
}

export function parseArgs(argv: string[]): PlotOptions {
  if (argv[0] !== "plot" || argv.length < 2) {
    throw new Error("usage: plot <run-dir> [--fields n,T,p] [--quiver] " +
                    "[--timeseries E,S,first_law_residual]");
  }
  const runDir = argv[1];
  let fields: string[] | null = null;
  let timeseries: string[] | null = null;
  let quiver = false;
  let anyFlag = false;
  for (let k = 2; k < argv.length; k++) {
    const a = argv[k];
    if (a === "--fields") {
      fields = (argv[++k] ?? "").split(",").filter((s) => s.length);
      if (!fields.length) throw new Error("--fields given with no field names");
      anyFlag = true;
    } else if (a === "--timeseries") {
      timeseries = (argv[++k] ?? "").split(",").filter((s) => s.length);
      if (!timeseries.length) throw new Error("--timeseries given with no columns");
      anyFlag = true;
    } else if (a === "--quiver") {
      quiver = true;
      anyFlag = true;
    } else {
      throw new Error(`unknown argument: ${a}`);
    }
  }
  if (!anyFlag) {
    // bare `plot <run-dir>` renders the full suite
    fields = [...HEATMAP_FIELDS];
    timeseries = ["E", "S", "first_law_residual"];
    quiver = true;
  }
  return { runDir, fields: fields ?? [], quiver, timeseries: timeseries ?? [] };
}

export function runPlot(opts: PlotOptions, log: (s: string) => void = console.log): void {
  const snapsPaths = listSnapshots(opts.runDir);
  const diagPath = path.join(opts.runDir, "diagnostics.csv");
  const haveDiag = fs.existsSync(diagPath);
  const diag = haveDiag ? parseDiagnostics(diagPath) : null;

  const timeOf = (step: number): number | undefined => {
    if (!diag) return undefined;
    const steps = diag.columns.get("step")!;
    const times = diag.columns.get("time")!;
    for (let k = 0; k < steps.length; k++) {
      if (steps[k] === step) return times[k];
    }
    return undefined;
  };

  for (const f of opts.fields) {
    if (!HEATMAP_FIELDS.includes(f)) {
      throw new Error(`unknown field: ${f} (expected one of ${HEATMAP_FIELDS.join(",")})`);
    }
  }

  const snaps = snapsPaths.map(parseSnapshot);
  let sharedMax = 0;
  if (opts.quiver) {
    for (const s of snaps) {
      const ux = s.fields.get("ux")!;
      const uy = s.fields.get("uy")!;
      for (let k = 0; k < ux.length; k++) {
        sharedMax = Math.max(sharedMax, Math.hypot(ux[k], uy[k]));
      }
    }
  }

  for (const s of snaps) {
    const base = s.path.replace(/\.csv$/, "");
    for (const f of opts.fields) {
      const out = `${base}_${f}.png`;
      renderHeatmap(s, f, out, timeOf(s.step));
      log(`wrote ${out}`);
    }
    if (opts.quiver) {
      const out = `${base}_quiver.png`;
      renderQuiver(s, out, sharedMax, timeOf(s.step));
      log(`wrote ${out}`);
    }
  }

  if (opts.timeseries.length) {
    if (!diag) throw new Error(`no diagnostics.csv in ${opts.runDir}`);
    const annotations: Record<string, unknown> = {};
    for (const col of opts.timeseries) {
      const out = path.join(opts.runDir, `timeseries_${col}.png`);
      const res = renderTimeseries(diag, col, out);
      log(`wrote ${out}`);
      if (res.annotation) {
        annotations[col] = res.annotation;
        log(`E curve: max step |dE|/|E0| = ${res.annotation.maxStepRelDelta.toExponential(6)}`);
      }
    }
    const annPath = path.join(opts.runDir, "timeseries_annotations.json");
    fs.writeFileSync(annPath, JSON.stringify(annotations, Object.keys(annotations).sort(), 1) + "\n");
    log(`wrote ${annPath}`);
  }
}

export function main(argv: string[]): number {
  try {
    runPlot(parseArgs(argv));
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (process.argv[1] && /cli\.(ts|js)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
