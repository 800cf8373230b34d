/** Distance-to-target curve with the fitted two-sided exponential envelope. */

import { MetricsDocument } from "./metrics";
import { Panel, document, extentOf } from "./svg";

export function renderTurnpike(metrics: MetricsDocument): string {
  const block = metrics.turnpike;
  if (!block || !block.distances || block.distances.length === 0) {
    throw new Error("metrics document carries no turnpike distances");
  }
  const { times, distances } = block;
  const horizon = times[times.length - 1];

  const positive = distances.filter((d) => d > 0);
  const floor = positive.length > 0 ? Math.min(...positive) * 0.5 : 1e-12;
  const logs = distances.map((d) => Math.log10(Math.max(d, floor)));

  const envelopeTimes: number[] = [];
  const envelopeLogs: number[] = [];
  const hasFit = !block.degenerate && block.mu !== null && block.gamma !== null;
  if (hasFit) {
    const mu = block.mu as number;
    const gamma = block.gamma as number;
    for (let i = 0; i <= 200; i++) {
      const t = (horizon * i) / 200;
      const value = gamma * (Math.exp(-mu * t) + Math.exp(-mu * (horizon - t)));
      envelopeTimes.push(t);
      envelopeLogs.push(Math.log10(Math.max(value, floor)));
    }
  }

  const [yMin, yMax] = extentOf(logs.concat(envelopeLogs));
  const extent = { xMin: 0, xMax: horizon, yMin, yMax };
  const panel = new Panel(60, 40, 560, 300, extent,
    `distance to target over time (log10)${hasFit ? "  with fitted envelope" : ""}`);
  panel.polyline(times, logs, "#2364aa", 1.5, "distance-curve");
  if (hasFit) {
    panel.polyline(envelopeTimes, envelopeLogs, "#c0392b", 1.5, "envelope", "6 4");
  }
  return document(680, 390, panel.render());
}
