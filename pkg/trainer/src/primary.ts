/**
 * Bridge to the ilwp codec.  The harness never links against it -- every
 * measurement goes through the CLI as a subprocess and the shared .wgt/.ilw
 * files, exactly as an external user of the codec would.
 *
 * The command defaults to `python3 -m ilwp`; set ILWP_CMD to override
 * (e.g. "ilwp" for the installed console script).
 */

import { spawnSync } from "node:child_process";

function command(): string[] {
  const env = process.env.ILWP_CMD;
  return env ? env.split(" ") : ["python3", "-m", "ilwp"];
}

export function runPrimary(args: string[]): string {
  const [cmd, ...pre] = command();
  const res = spawnSync(cmd, [...pre, ...args], { encoding: "utf8" });
  if (res.error) throw new Error(`failed to launch ilwp CLI: ${res.error.message}`);
  if (res.status !== 0) {
    throw new Error(
      `ilwp ${args.join(" ")} exited ${res.status}: ${res.stderr.trim() || res.stdout.trim()}`
    );
  }
  return res.stdout;
}

export interface StatsReport {
  mode: string;
  bits: number;
  sizes: {
    texture_bits: number;
    non_texture_bits: number;
    header_bits: number;
    total_bits: number;
    total_kb: number;
  };
  zero_symbol_fraction: number;
  symbol_entropy_bits: number;
  svwh_ratio: number | null;
}

/** Size/entropy report for one mode and bit width of a .wgt export. */
export function stats(wgtPath: string, mode: string, bits: number): StatsReport {
  const out = runPrimary([
    "stats", "--mode", mode, "--bits", String(bits), wgtPath, "--report", "json",
  ]);
  return JSON.parse(jsonPart(out)) as StatsReport;
}

export interface HeatmapReport {
  target_layers: number[];
  matrix: number[][]; // row per target layer, percentages over source layers
  svwh_ratio: number | null;
}

export function heatmap(wgtPath: string): HeatmapReport {
  const out = runPrimary(["heatmap", wgtPath, "--report", "json"]);
  return JSON.parse(jsonPart(out)) as HeatmapReport;
}

/** Percent of full-search picks landing on the immediately previous layer. */
export function previousLayerMass(report: HeatmapReport): number {
  let acc = 0;
  for (let k = 0; k < report.target_layers.length; k++) {
    acc += report.matrix[k][report.target_layers[k] - 1];
  }
  return acc / report.target_layers.length;
}

export function encode(wgtPath: string, ilwPath: string, mode: string, bits: number): void {
  runPrimary(["encode", "--mode", mode, "--bits", String(bits), wgtPath, ilwPath]);
}

export function decode(ilwPath: string, wgtPath: string): void {
  runPrimary(["decode", ilwPath, wgtPath]);
}

/** Stdout reports carry a one-line plain-text summary; cut to the JSON body. */
function jsonPart(out: string): string {
  const i = out.indexOf("{");
  const j = out.lastIndexOf("}");
  if (i < 0 || j < i) throw new Error(`no JSON found in ilwp output: ${out}`);
  return out.slice(i, j + 1);
}
