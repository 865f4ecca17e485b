import { describe, expect, it } from "vitest";

import {
  applyDesignResponse,
  applyJobFailure,
  applyOptimizeResult,
  applyPreview,
  bestPatch,
  emptyDesignView,
  emptyJobPanel,
  slidersFromDesign,
  upsertJob,
} from "../src/state.js";
import type { DesignResponse, JobRecord, OptimizeResult } from "../src/types.js";

function designResponse(version = 1): DesignResponse {
  return {
    id: "d1",
    version,
    document: {
      schema_version: 1,
      parts: [
        {
          name: "pad",
          role: "sensing_surface",
          mesh: "meshes/pad.obj",
          material: { kind: "rough_conductor", specularity: 0.4 },
        },
        {
          name: "m1",
          role: "mirror",
          mesh: "meshes/m.obj",
          material: "mirror",
          cage: { alpha: [[0.1, 0.2, 0.3]] },
        },
      ],
      lights: [
        { name: "r0", preset: "p", position: [-9, 0, -3], orientation: [0, 0, 1], color: "R", group: "left" },
        { name: "r1", preset: "p", position: [-9, 2, -3], orientation: [0, 0, 1], color: "R", group: "left" },
        { name: "g0", preset: "p", position: [9, 0, -3], orientation: [0, 0, 1], color: "G", group: "right" },
        { name: "b0", preset: "p", position: [0, -7, -3], orientation: [0, 0, 1], color: "B", group: "front" },
      ],
      camera: {},
    },
    report: {
      name: "mini",
      parts: [
        { name: "pad", role: "sensing_surface", material: "coating", faces: 100, caged: false },
        { name: "m1", role: "mirror", material: "mirror", faces: 2, caged: true },
      ],
      light_groups: ["left", "right", "front"],
      camera: {},
      roles: {},
    },
  };
}

describe("slidersFromDesign", () => {
  it("builds one position cluster per light group plus material sliders", () => {
    const sliders = slidersFromDesign(designResponse());
    const positionSliders = sliders.filter(
      (s) => s.binding.target === "light_position",
    );
    // 3 groups x 3 axes, not 4 lights x 3 axes: one cluster per group
    expect(positionSliders).toHaveLength(9);
    expect(new Set(positionSliders.map((s) => s.binding.light)).size).toBe(3);

    const spec = sliders.filter((s) => s.binding.target === "specularity");
    expect(spec).toHaveLength(1);
    expect(spec[0].value).toBeCloseTo(0.4);

    const cage = sliders.filter((s) => s.binding.target === "cage_alpha");
    expect(cage).toHaveLength(3);
    expect(cage.map((s) => s.binding.index)).toEqual([0, 1, 2]);
    expect(cage.map((s) => s.value)).toEqual([0.1, 0.2, 0.3]);
  });
});

describe("version tracking", () => {
  it("drops stale design responses", () => {
    let state = applyDesignResponse(emptyDesignView(), designResponse(3));
    expect(state.version).toBe(3);
    state = applyDesignResponse(state, designResponse(2)); // out of order
    expect(state.version).toBe(3);
  });

  it("marks the view stale until a matching preview arrives", () => {
    let state = applyDesignResponse(emptyDesignView(), designResponse(2));
    expect(state.stale).toBe(true);
    state = applyPreview(state, 2);
    expect(state.stale).toBe(false);
    expect(state.previewVersion).toBe(2);
  });

  it("drops previews older than the one on screen", () => {
    let state = applyDesignResponse(emptyDesignView(), designResponse(2));
    state = applyPreview(state, 2);
    state = applyPreview(state, 1);
    expect(state.previewVersion).toBe(2);
  });
});

describe("job panel", () => {
  const job = (state: JobRecord["state"], progress = 0.5): JobRecord => ({
    id: "j1",
    kind: "optimize",
    state,
    progress,
  });

  it("upserts job records by id", () => {
    let panel = upsertJob(emptyJobPanel(), job("running"));
    panel = upsertJob(panel, job("done", 1));
    expect(panel.jobs).toHaveLength(1);
    expect(panel.jobs[0].state).toBe("done");
  });

  it("keeps chart history equal to the server log and finds the best", () => {
    const result: OptimizeResult = {
      method: "grid",
      objective: "rgb2normal",
      budget: 3,
      evaluations: 3,
      best_score: 0.9,
      best_params: [0.5],
      history: [
        { params: [0.1], score: 0.2, seconds: 1 },
        { params: [0.5], score: 0.9, seconds: 1 },
        { params: [0.9], score: 0.4, seconds: 1 },
      ],
    };
    const panel = applyOptimizeResult(emptyJobPanel(), result);
    expect(panel.history).toHaveLength(3);
    expect(panel.bestIndex).toBe(1);
    expect(panel.bestParams).toEqual([0.5]);
  });

  it("shows server error text verbatim", () => {
    const panel = applyJobFailure(
      emptyJobPanel(),
      'UnknownObjective: unknown objective "warpp"',
    );
    expect(panel.error).toBe('UnknownObjective: unknown objective "warpp"');
    expect(panel.history).toHaveLength(0);
  });
});

describe("bestPatch", () => {
  it("pairs space dimensions with best params in order", () => {
    const patch = bestPatch(
      [{ name: "spec", binding: { target: "specularity", part: "pad" } }],
      [0.3],
    );
    expect(patch).toEqual([
      { binding: { target: "specularity", part: "pad" }, value: 0.3 },
    ]);
  });

  it("rejects mismatched lengths", () => {
    expect(() => bestPatch([], [0.3])).toThrow(/dimensions/);
  });
});
