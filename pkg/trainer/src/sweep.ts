/**
 * Lambda sweep: one training run per lambda, each export measured by the
 * codec CLI in ILL mode.  A failing run is recorded in its row and the
 * sweep continues.
 */

import * as path from "node:path";
import { stats } from "./primary";
import { TrainConfig, trainAndExport } from "./train";

export type SweepRow =
  | { lambda: number; accuracy: number; illTotalBits: number; wgtPath: string }
  | { lambda: number; error: string };

export function lambdaSweep(
  base: Omit<TrainConfig, "lambda">,
  lambdas: number[],
  workDir: string,
  bits = 8,
): SweepRow[] {
  if (lambdas.length === 0) throw new Error("lambda sweep needs at least one lambda");
  const rows: SweepRow[] = [];
  for (const lambda of lambdas) {
    try {
      const wgtPath = path.join(workDir, `export_lambda_${lambda}.wgt`);
      const result = trainAndExport({ ...base, lambda }, wgtPath);
      const report = stats(wgtPath, "ill", bits);
      rows.push({
        lambda,
        accuracy: result.metrics.testAccuracy,
        illTotalBits: report.sizes.total_bits,
        wgtPath,
      });
    } catch (err) {
      rows.push({ lambda, error: err instanceof Error ? err.message : String(err) });
    }
  }
  return rows;
}
