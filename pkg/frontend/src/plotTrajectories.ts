/** Three-panel figure: inputs, trajectory fan, outputs, colored by label. */

import { Trajectory } from "./csv";
import { Panel, document, extentOf, labelColor } from "./svg";

export interface TrajectoryPlotOptions {
  /** target markers, e.g. [[2, 2], [-2, -2]] */
  targets?: number[][];
}

export function renderTrajectories(
  traj: Trajectory,
  labels: number[],
  options: TrajectoryPlotOptions = {},
): string {
  if (labels.length !== traj.samples) {
    throw new Error(`got ${labels.length} labels for ${traj.samples} samples`);
  }
  if (traj.dims < 1) {
    throw new Error("need at least one state dimension");
  }
  const dimY = traj.dims >= 2 ? 1 : 0;
  const nodes = traj.times.length;

  const allX: number[] = [];
  const allY: number[] = [];
  for (const frame of traj.states) {
    for (const coords of frame) {
      allX.push(coords[0]);
      allY.push(coords[dimY]);
    }
  }
  for (const target of options.targets ?? []) {
    allX.push(target[0], -target[0]);
    allY.push(target[dimY] ?? target[0], -(target[dimY] ?? target[0]));
  }
  const [xMin, xMax] = extentOf(allX);
  const [yMin, yMax] = extentOf(allY);
  const extent = { xMin, xMax, yMin, yMax };

  const size = 260;
  const gap = 40;
  const top = 40;
  const panels = [
    new Panel(gap, top, size, size, extent, "inputs"),
    new Panel(gap * 2 + size, top, size, size, extent, "trajectories"),
    new Panel(gap * 3 + size * 2, top, size, size, extent, "outputs"),
  ];

  for (let i = 0; i < traj.samples; i++) {
    const color = labelColor(labels[i]);
    panels[0].circle(traj.states[0][i][0], traj.states[0][i][dimY], 3, color);
    const xs: number[] = [];
    const ys: number[] = [];
    for (let k = 0; k < nodes; k++) {
      xs.push(traj.states[k][i][0]);
      ys.push(traj.states[k][i][dimY]);
    }
    panels[1].polyline(xs, ys, color, 0.8, "trajectory");
    panels[2].circle(traj.states[nodes - 1][i][0], traj.states[nodes - 1][i][dimY], 3, color);
  }
  for (const target of options.targets ?? []) {
    const ty = target[dimY] ?? target[0];
    for (const panel of [panels[1], panels[2]]) {
      panel.marker(target[0], ty, "#111");
      panel.marker(-target[0], -ty, "#111");
    }
  }
  const width = gap * 4 + size * 3;
  return document(width, top + size + gap, panels.map((p) => p.render()).join(""));
}
