/** Readers for the trajectory and labels CSV formats. */

export interface Trajectory {
  /** node times, length K+1 */
  times: number[];
  /** states[node][sample][dim] */
  states: number[][][];
  samples: number;
  dims: number;
}

export function parseTrajectoryCsv(text: string): Trajectory {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length < 2) {
    throw new Error("trajectory CSV needs a header and at least one row");
  }
  const header = lines[0].split(",");
  if (header[0] !== "t" || header[1] !== "sample") {
    throw new Error(`unexpected trajectory header: ${lines[0]}`);
  }
  const dims = header.length - 2;
  for (let j = 0; j < dims; j++) {
    if (header[j + 2] !== `dim_${j}`) {
      throw new Error(`missing column dim_${j} in trajectory header`);
    }
  }
  const rows: { t: number; sample: number; coords: number[] }[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== dims + 2) {
      throw new Error(`line ${i + 1}: expected ${dims + 2} fields, got ${parts.length}`);
    }
    const t = Number(parts[0]);
    const sample = Number(parts[1]);
    const coords = parts.slice(2).map(Number);
    if (!isFinite(t) || !Number.isInteger(sample) || coords.some((v) => !isFinite(v))) {
      throw new Error(`line ${i + 1}: malformed numeric fields`);
    }
    rows.push({ t, sample, coords });
  }
  const samples = Math.max(...rows.map((r) => r.sample)) + 1;
  if (rows.length % samples !== 0) {
    throw new Error(`row count ${rows.length} is not divisible by ${samples} samples`);
  }
  const nodes = rows.length / samples;
  const times: number[] = [];
  const states: number[][][] = [];
  for (let k = 0; k < nodes; k++) {
    const block = rows.slice(k * samples, (k + 1) * samples);
    times.push(block[0].t);
    const frame: number[][] = new Array(samples);
    for (const row of block) {
      frame[row.sample] = row.coords;
    }
    states.push(frame);
  }
  return { times, states, samples, dims };
}

export function parseLabelsCsv(text: string): number[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0 || lines[0] !== "sample,label") {
    throw new Error("labels CSV must start with 'sample,label'");
  }
  const labels: number[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== 2) {
      throw new Error(`line ${i + 1}: expected two fields`);
    }
    const value = Number(parts[1]);
    if (!isFinite(value)) {
      throw new Error(`line ${i + 1}: malformed label`);
    }
    labels.push(value);
  }
  return labels;
}
