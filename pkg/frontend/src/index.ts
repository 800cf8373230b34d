export { parseTrajectoryCsv, parseLabelsCsv, Trajectory } from "./csv";
export { parseMetrics, MetricsDocument, TurnpikeBlock } from "./metrics";
export { renderTrajectories, TrajectoryPlotOptions } from "./plotTrajectories";
export { renderTurnpike } from "./plotTurnpike";
