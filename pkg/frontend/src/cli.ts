/**
 * Render figure analogs from simulator CSV outputs.
 *
 *   node dist/cli.js --kind scan --input scan.csv --dips dips.csv --out fig.svg
 *   node dist/cli.js --kind multi-panel --input a.csv,b.csv,... --dips ...
 *
 * Kinds: trace, trace-overlay, scan, scan-overlay, direction-map,
 * multi-panel.  Inputs are validated against the kind (a trace renderer
 * refuses a frequency-axis CSV and vice versa).
 */

import { readFileSync, writeFileSync } from "node:fs";

import {
  parseDips,
  parseDirectionMap,
  parseScan,
  parseTrace,
} from "./csv.js";
import {
  renderDirectionMap,
  renderMultiPanel,
  renderScan,
  renderScanOverlay,
  renderTrace,
  renderTraceOverlay,
} from "./plots.js";

interface Args {
  kind: string;
  inputs: string[];
  dips: string[];
  out: string;
  title: string;
  labels: string[];
}

function parseArgs(argv: string[]): Args {
  const args: Args = {
    kind: "", inputs: [], dips: [], out: "", title: "", labels: [],
  };
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (value === undefined) throw new Error(`missing value for ${key}`);
    switch (key) {
      case "--kind": args.kind = value; break;
      case "--input": args.inputs = value.split(","); break;
      case "--dips": args.dips = value.split(","); break;
      case "--out": args.out = value; break;
      case "--title": args.title = value; break;
      case "--labels": args.labels = value.split(","); break;
      default: throw new Error(`unknown flag ${key}`);
    }
  }
  if (!args.kind || args.inputs.length === 0 || !args.out) {
    throw new Error("required: --kind, --input, --out");
  }
  return args;
}

function load(path: string): string {
  return readFileSync(path, "utf8");
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err));
    return 2;
  }
  try {
    let svg: string;
    switch (args.kind) {
      case "trace":
        svg = renderTrace(parseTrace(load(args.inputs[0])), args.title);
        break;
      case "trace-overlay":
        svg = renderTraceOverlay(
          args.inputs.map((p) => parseTrace(load(p))), args.labels, args.title,
        );
        break;
      case "scan":
        svg = renderScan(
          parseScan(load(args.inputs[0])),
          args.dips.length ? parseDips(load(args.dips[0])) : null,
          args.title,
        );
        break;
      case "scan-overlay":
        svg = renderScanOverlay(
          args.inputs.map((p) => parseScan(load(p))), args.labels,
          args.dips.length ? parseDips(load(args.dips[0])) : null,
          args.title,
        );
        break;
      case "direction-map":
        svg = renderDirectionMap(
          parseDirectionMap(load(args.inputs[0])), args.title,
        );
        break;
      case "multi-panel": {
        const scans = args.inputs.map((p) => parseScan(load(p)));
        const reports = args.inputs.map((_, k) =>
          args.dips[k] ? parseDips(load(args.dips[k])) : null,
        );
        const titles = args.labels.length
          ? args.labels
          : scans.map((s) => String(s.meta["direction"] ?? ""));
        svg = renderMultiPanel(scans, reports, titles);
        break;
      }
      default:
        console.error(`unknown kind ${args.kind}`);
        return 2;
    }
    writeFileSync(args.out, svg);
    return 0;
  } catch (err) {
    console.error(String(err));
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
