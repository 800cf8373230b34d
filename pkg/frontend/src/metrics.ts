/** The metrics JSON document emitted by the experiment runner. */

export interface TurnpikeBlock {
  times: number[];
  distances: number[];
  gamma: number | null;
  mu: number | null;
  r_squared: number | null;
  degenerate: boolean;
  mid_mean: number;
  final_gap: number;
  fractions: Record<string, number> | null;
  t_prime: number | null;
}

export interface MetricsDocument {
  experiment: string;
  config: Record<string, unknown>;
  turnpike: TurnpikeBlock | null;
  train: Record<string, unknown> | null;
  [extra: string]: unknown;
}

export function parseMetrics(text: string): MetricsDocument {
  const doc = JSON.parse(text) as MetricsDocument;
  if (typeof doc !== "object" || doc === null || typeof doc.experiment !== "string") {
    throw new Error("metrics document must carry an experiment name");
  }
  return doc;
}
