/**
 * Entry point: run the lambda sweep and print one row per lambda.
 *
 *   npm run sweep -- [--lambdas 0,1] [--epochs 12] [--out DIR] [--cifar DIR]
 *
 * Without --cifar this trains on the synthetic dataset at a reduced
 * architecture so a sweep finishes in minutes on a CPU; --cifar switches to
 * CIFAR-10 binary batches and the full default architecture (much slower).
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { DEFAULT_ARCH } from "./model";
import { lambdaSweep } from "./sweep";
import { TrainConfig } from "./train";
import { deskConfig } from "./desk";

function arg(name: string, fallback: string): string {
  const i = process.argv.indexOf(`--${name}`);
  return i >= 0 && process.argv[i + 1] ? process.argv[i + 1] : fallback;
}

function main(): void {
  const lambdas = arg("lambdas", "0,1").split(",").map(Number);
  const epochs = Number(arg("epochs", "24"));
  const outDir = arg("out", path.join(process.cwd(), "runs"));
  const cifarDir = arg("cifar", "");
  fs.mkdirSync(outDir, { recursive: true });

  const base: Omit<TrainConfig, "lambda"> = cifarDir
    ? {
        epochs,
        batchSize: 64,
        seed: 7,
        arch: DEFAULT_ARCH,
        dataset: { kind: "cifar10", dir: cifarDir },
        clipNorm: 1,
      }
    : (({ lambda: _, ...rest }) => rest)(deskConfig(0, { epochs }));

  const rows = lambdaSweep(base, lambdas, outDir);
  console.log(`${"lambda".padStart(8)} ${"accuracy".padStart(10)} ${"ill bits".padStart(10)}`);
  for (const row of rows) {
    if ("error" in row) {
      console.log(`${String(row.lambda).padStart(8)}  FAILED: ${row.error}`);
    } else {
      console.log(
        `${String(row.lambda).padStart(8)} ${(100 * row.accuracy).toFixed(2).padStart(9)}% ` +
        `${String(row.illTotalBits).padStart(10)}`
      );
    }
  }
  fs.writeFileSync(path.join(outDir, "sweep.json"), JSON.stringify(rows, null, 2) + "\n");
}

main();
