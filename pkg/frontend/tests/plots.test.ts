import { readFileSync } from "fs";
import { join } from "path";

import { describe, expect, it } from "vitest";

import { parseLabelsCsv, parseTrajectoryCsv } from "../src/csv";
import { parseMetrics } from "../src/metrics";
import { renderTrajectories } from "../src/plotTrajectories";
import { renderTurnpike } from "../src/plotTurnpike";

const FIXTURES = join(__dirname, "fixtures");

function fixtureTrajectory() {
  return parseTrajectoryCsv(readFileSync(join(FIXTURES, "trajectory.csv"), "utf-8"));
}

function fixtureLabels() {
  return parseLabelsCsv(readFileSync(join(FIXTURES, "labels.csv"), "utf-8"));
}

describe("renderTrajectories", () => {
  it("renders three panels from the fixture run", () => {
    const svg = renderTrajectories(fixtureTrajectory(), fixtureLabels(), { targets: [[2, 2]] });
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain(">inputs<");
    expect(svg).toContain(">trajectories<");
    expect(svg).toContain(">outputs<");
    expect((svg.match(/class="trajectory"/g) ?? []).length).toBe(12);
    expect(svg).toContain("target-marker");
  });

  it("renders a single-sample file", () => {
    const traj = parseTrajectoryCsv("t,sample,dim_0,dim_1\n0,0,1,0\n1,0,0,1\n");
    const svg = renderTrajectories(traj, [1]);
    expect(svg).toContain("polyline");
  });

  it("rejects mismatched label counts", () => {
    expect(() => renderTrajectories(fixtureTrajectory(), [1, -1])).toThrow(/labels/);
  });
});

describe("renderTurnpike", () => {
  it("overlays the fitted envelope from the fixture metrics", () => {
    const metrics = parseMetrics(readFileSync(join(FIXTURES, "metrics.json"), "utf-8"));
    const svg = renderTurnpike(metrics);
    expect(svg).toContain('class="distance-curve"');
    expect(svg).toContain('class="envelope"');
  });

  it("renders a synthetic exponential report with the envelope", () => {
    const times = Array.from({ length: 21 }, (_, i) => i * 0.5);
    const metrics = {
      experiment: "synthetic",
      config: {},
      train: null,
      turnpike: {
        times,
        distances: times.map((t) => 3 * Math.exp(-0.7 * t)),
        gamma: 3,
        mu: 0.7,
        r_squared: 1,
        degenerate: false,
        mid_mean: 0.1,
        final_gap: 0.002,
        fractions: null,
        t_prime: null,
      },
    };
    const svg = renderTurnpike(metrics);
    expect(svg).toContain('class="envelope"');
  });

  it("renders a degenerate report without the envelope", () => {
    const metrics = {
      experiment: "degenerate",
      config: {},
      train: null,
      turnpike: {
        times: [0, 1, 2],
        distances: [0, 0, 0],
        gamma: null,
        mu: null,
        r_squared: null,
        degenerate: true,
        mid_mean: 0,
        final_gap: 0,
        fractions: null,
        t_prime: null,
      },
    };
    const svg = renderTurnpike(metrics);
    expect(svg).toContain('class="distance-curve"');
    expect(svg).not.toContain('class="envelope"');
  });

  it("rejects a report without distances", () => {
    expect(() =>
      renderTurnpike({ experiment: "x", config: {}, train: null, turnpike: null }),
    ).toThrow(/turnpike/);
  });
});
