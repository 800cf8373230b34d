#!/usr/bin/env node
/**
 * Static figure renderer for experiment outputs.
 *
 *   plot-trajectories <trajectory.csv> <labels.csv> <out.svg> [--targets x,y]
 *   plot-turnpike <metrics.json> <out.svg>
 */

import { readFileSync, writeFileSync } from "fs";

import { parseLabelsCsv, parseTrajectoryCsv } from "./csv";
import { parseMetrics } from "./metrics";
import { renderTrajectories } from "./plotTrajectories";
import { renderTurnpike } from "./plotTurnpike";

function usage(): never {
  process.stderr.write(
    "usage: odelearn-plots plot-trajectories <traj.csv> <labels.csv> <out.svg> [--targets x,y]\n" +
      "       odelearn-plots plot-turnpike <metrics.json> <out.svg>\n",
  );
  process.exit(2);
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "plot-trajectories") {
      if (rest.length < 3) usage();
      const [trajPath, labelsPath, outPath] = rest;
      let targets: number[][] | undefined;
      const flag = rest.indexOf("--targets");
      if (flag >= 0) {
        const spec = rest[flag + 1];
        if (!spec) usage();
        targets = [spec.split(",").map(Number)];
      }
      const traj = parseTrajectoryCsv(readFileSync(trajPath, "utf-8"));
      const labels = parseLabelsCsv(readFileSync(labelsPath, "utf-8"));
      writeFileSync(outPath, renderTrajectories(traj, labels, { targets }));
      return 0;
    }
    if (command === "plot-turnpike") {
      if (rest.length < 2) usage();
      const [metricsPath, outPath] = rest;
      const metrics = parseMetrics(readFileSync(metricsPath, "utf-8"));
      writeFileSync(outPath, renderTurnpike(metrics));
      return 0;
    }
    usage();
  } catch (error) {
    process.stderr.write(`error: ${(error as Error).message}\n`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
