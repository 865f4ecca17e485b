/** View state for the design pane and the job panel.
 *
 * Pure data + reducer functions so the logic is testable without a DOM.
 * Invariants enforced here:
 *  - the displayed version only moves forward; stale responses (older
 *    version tag) are dropped;
 *  - chart points always equal the server job history length.
 */

import type {
  Binding,
  DesignResponse,
  HistoryEntry,
  JobRecord,
  OptimizeResult,
} from "./types.js";

export interface SliderSpec {
  label: string;
  binding: Binding;
  value: number;
  lo: number;
  hi: number;
  step: number;
}

export interface DesignViewState {
  id: string;
  name: string;
  version: number;
  /** version of the preview image currently on screen */
  previewVersion: number;
  stale: boolean;
  parts: Array<{ name: string; role: string; caged: boolean }>;
  sliders: SliderSpec[];
  scores: Record<string, number>;
  error: string | null;
}

export function emptyDesignView(): DesignViewState {
  return {
    id: "",
    name: "",
    version: 0,
    previewVersion: 0,
    stale: false,
    parts: [],
    sliders: [],
    scores: {},
    error: null,
  };
}

/** Build the slider set from a design document: per-group light-position
 * sliders, one specularity slider per conductor part, and cage-alpha
 * sliders when a cage exists. */
export function slidersFromDesign(resp: DesignResponse): SliderSpec[] {
  const sliders: SliderSpec[] = [];
  const doc = resp.document;

  const seenGroups = new Set<string>();
  doc.lights.forEach((light, i) => {
    if (seenGroups.has(light.group)) return;
    seenGroups.add(light.group);
    const axes = ["x", "y", "z"] as const;
    axes.forEach((axisName, axis) => {
      sliders.push({
        label: `${light.group} position ${axisName}`,
        binding: { target: "light_position", light: i, axis },
        value: light.position[axis],
        lo: light.position[axis] - 10,
        hi: light.position[axis] + 10,
        step: 0.5,
      });
    });
  });

  for (const part of doc.parts) {
    const material = part.material as { specularity?: number } | string;
    if (typeof material === "object" && material?.specularity !== undefined) {
      sliders.push({
        label: `${part.name} specularity`,
        binding: { target: "specularity", part: part.name },
        value: material.specularity,
        lo: 0,
        hi: 1,
        step: 0.01,
      });
    }
    if (part.cage?.alpha) {
      part.cage.alpha.forEach((row, cp) => {
        row.forEach((value, comp) => {
          const index = cp * 3 + comp;
          sliders.push({
            label: `${part.name} cage[${index}]`,
            binding: { target: "cage_alpha", part: part.name, index },
            value,
            lo: 0,
            hi: 1,
            step: 0.01,
          });
        });
      });
    }
  }
  return sliders;
}

export function applyDesignResponse(
  state: DesignViewState,
  resp: DesignResponse,
): DesignViewState {
  if (resp.version < state.version) return state; // stale response: drop
  return {
    ...state,
    id: resp.id,
    name: resp.report.name,
    version: resp.version,
    stale: resp.version !== state.previewVersion,
    parts: resp.report.parts.map((p) => ({
      name: p.name,
      role: p.role,
      caged: p.caged,
    })),
    sliders: slidersFromDesign(resp),
    error: null,
  };
}

export function applyPreview(
  state: DesignViewState,
  renderedVersion: number,
): DesignViewState {
  if (renderedVersion < state.previewVersion) return state; // stale image
  return {
    ...state,
    previewVersion: renderedVersion,
    stale: state.version !== renderedVersion,
  };
}

export function applyScore(
  state: DesignViewState,
  objective: string,
  score: number,
): DesignViewState {
  return { ...state, scores: { ...state.scores, [objective]: score } };
}

// ---------------------------------------------------------------------------
// job panel

export interface JobPanelState {
  jobs: JobRecord[];
  selected: string | null;
  history: HistoryEntry[];
  bestIndex: number | null;
  bestParams: Array<number | string> | null;
  error: string | null;
}

export function emptyJobPanel(): JobPanelState {
  return {
    jobs: [],
    selected: null,
    history: [],
    bestIndex: null,
    bestParams: null,
    error: null,
  };
}

export function upsertJob(state: JobPanelState, job: JobRecord): JobPanelState {
  const jobs = state.jobs.some((j) => j.id === job.id)
    ? state.jobs.map((j) => (j.id === job.id ? job : j))
    : [...state.jobs, job];
  return { ...state, jobs };
}

export function applyOptimizeResult(
  state: JobPanelState,
  result: OptimizeResult,
): JobPanelState {
  let bestIndex: number | null = null;
  result.history.forEach((entry, i) => {
    if (bestIndex === null || entry.score > result.history[bestIndex].score) {
      bestIndex = i;
    }
  });
  return {
    ...state,
    history: result.history,
    bestIndex,
    bestParams: result.best_params,
    error: null,
  };
}

export function applyJobFailure(
  state: JobPanelState,
  errorText: string,
): JobPanelState {
  // server error text is shown verbatim
  return { ...state, error: errorText, history: [], bestIndex: null };
}

/** "Apply best": slider values to PATCH from a finished job's best params. */
export function bestPatch(
  dimensions: Array<{ name: string; binding: Binding }>,
  bestParams: Array<number | string>,
): Array<{ binding: Binding; value: number | string }> {
  if (dimensions.length !== bestParams.length) {
    throw new Error(
      `space has ${dimensions.length} dimensions but best params has ` +
        `${bestParams.length}`,
    );
  }
  return dimensions.map((dim, i) => ({
    binding: dim.binding,
    value: bestParams[i],
  }));
}
