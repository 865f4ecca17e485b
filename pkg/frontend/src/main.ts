/** Studio UI: load a design, steer parameters with live preview and
 * scores, launch optimization jobs, and apply the best result.
 *
 * All physics happens server-side; this file only wires DOM controls to
 * the HTTP client and the pure state reducers.
 */

import { ApiError, pollJob, StudioClient } from "./api.js";
import { renderChartSvg } from "./chart.js";
import { DebouncedSender } from "./debounce.js";
import {
  applyDesignResponse,
  applyJobFailure,
  applyOptimizeResult,
  applyPreview,
  applyScore,
  bestPatch,
  emptyDesignView,
  emptyJobPanel,
  upsertJob,
  type DesignViewState,
  type JobPanelState,
} from "./state.js";
import type {
  Binding,
  DesignResponse,
  JobRecord,
  OptimizeResult,
} from "./types.js";

const client = new StudioClient("");
let view: DesignViewState = emptyDesignView();
let jobs: JobPanelState = emptyJobPanel();
let lastSpaceDims: Array<{ name: string; binding: Binding }> = [];

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

function toast(message: string): void {
  const el = $("toast");
  el.textContent = message;
  el.classList.add("visible");
  setTimeout(() => el.classList.remove("visible"), 4000);
}

// ---------------------------------------------------------------------------
// design pane

function renderDesign(): void {
  $("design-title").textContent = view.id
    ? `${view.name} (v${view.version})`
    : "no design loaded";
  $("stale-badge").hidden = !view.stale;

  const tree = $("part-tree");
  tree.innerHTML = "";
  for (const part of view.parts) {
    const li = document.createElement("li");
    li.textContent = part.name;
    const badge = document.createElement("span");
    badge.className = "badge";
    badge.textContent = part.role + (part.caged ? " · caged" : "");
    li.appendChild(badge);
    tree.appendChild(li);
  }

  const panel = $("sliders");
  panel.innerHTML = "";
  view.sliders.forEach((spec, i) => {
    const row = document.createElement("label");
    row.className = "slider-row";
    const name = document.createElement("span");
    name.textContent = spec.label;
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(spec.lo);
    input.max = String(spec.hi);
    input.step = String(spec.step);
    input.value = String(spec.value);
    input.dataset.slider = String(i);
    const value = document.createElement("output");
    value.textContent = Number(spec.value).toFixed(2);
    input.addEventListener("input", () => {
      value.textContent = Number(input.value).toFixed(2);
      steer.update({ binding: spec.binding, value: Number(input.value) });
    });
    row.append(name, input, value);
    panel.appendChild(row);
  });

  const scores = $("scores");
  scores.innerHTML = "";
  for (const [objective, score] of Object.entries(view.scores)) {
    const row = document.createElement("tr");
    row.innerHTML = `<td>${objective}</td><td>${score.toFixed(5)}</td>`;
    scores.appendChild(row);
  }
}

async function refreshPreview(): Promise<void> {
  if (!view.id) return;
  try {
    const { blob, version } = await client.fetchPreview(view.id, view.version);
    view = applyPreview(view, version);
    const img = $("preview") as HTMLImageElement;
    const old = img.dataset.url;
    img.src = URL.createObjectURL(blob);
    if (old) URL.revokeObjectURL(old);
    img.dataset.url = img.src;
    renderDesign();
  } catch (err) {
    toast(String(err));
  }
}

async function refreshFastScores(): Promise<void> {
  // AOAP and warp are probe-based and cheap; run them after every steer
  for (const objective of ["aoap", "warp"]) {
    try {
      const job = await client.postJob({
        kind: "evaluate",
        design_id: view.id,
        request: { objective },
      });
      const done = await pollJob(client, job.id);
      if (done.state === "done") {
        const report = await client.getResult<{ score: number }>(job.id);
        view = applyScore(view, objective, report.score);
      }
    } catch (err) {
      toast(String(err));
    }
  }
  renderDesign();
}

const steer = new DebouncedSender<{ binding: Binding; value: number }>(
  async ({ binding, value }) => {
    try {
      const resp = await client.patchParams(view.id, [{ binding, value }]);
      view = applyDesignResponse(view, resp);
      renderDesign();
      await refreshPreview();
      void refreshFastScores();
    } catch (err) {
      toast(String(err));
    }
  },
);

async function loadDesign(resp: DesignResponse): Promise<void> {
  view = applyDesignResponse(emptyDesignView(), resp);
  renderDesign();
  await refreshPreview();
  void refreshFastScores();
}

// ---------------------------------------------------------------------------
// job panel

function renderJobs(): void {
  const list = $("job-list");
  list.innerHTML = "";
  for (const job of jobs.jobs) {
    const li = document.createElement("li");
    li.textContent =
      `${job.kind} ${job.id.slice(0, 8)} — ${job.state} ` +
      `${Math.round(job.progress * 100)}%`;
    list.appendChild(li);
  }
  $("chart").innerHTML = renderChartSvg(jobs.history);
  $("chart-note").textContent = jobs.history.length
    ? `${jobs.history.length} evaluations, best ` +
      `${jobs.history[jobs.bestIndex ?? 0].score.toFixed(5)}`
    : "";
  $("job-error").textContent = jobs.error ?? "";
  ($("apply-best") as HTMLButtonElement).disabled = jobs.bestParams === null;
}

async function launchOptimization(): Promise<void> {
  const space = JSON.parse(($("space-json") as HTMLTextAreaElement).value);
  lastSpaceDims = space.dimensions ?? [];
  const body = {
    kind: "optimize",
    design_id: view.id,
    request: {
      space,
      method: ($("opt-method") as HTMLSelectElement).value,
      objective: ($("opt-objective") as HTMLSelectElement).value,
      budget: Number(($("opt-budget") as HTMLInputElement).value),
      config: { locations: 4, render: { iterations: 2, photons_per_iter: 10000 } },
    },
  };
  try {
    const job = await client.postJob(body);
    jobs = upsert(job);
    const done = await pollJob(client, job.id, (j) => {
      jobs = upsert(j);
      renderJobs();
    });
    if (done.state === "failed") {
      jobs = applyJobFailure(jobs, done.error ?? "job failed");
    } else {
      const result = await client.getOptimizeResult(job.id);
      jobs = applyOptimizeResult(jobs, result as OptimizeResult);
    }
    renderJobs();
  } catch (err) {
    jobs = applyJobFailure(
      jobs,
      err instanceof ApiError ? err.record.message : String(err),
    );
    renderJobs();
  }
}

function upsert(job: JobRecord): JobPanelState {
  return upsertJob(jobs, job);
}

async function applyBest(): Promise<void> {
  if (!jobs.bestParams) return;
  try {
    const patch = bestPatch(lastSpaceDims, jobs.bestParams);
    const resp = await client.patchParams(view.id, patch);
    view = applyDesignResponse(view, resp);
    renderDesign();
    await refreshPreview();
    void refreshFastScores();
  } catch (err) {
    toast(String(err));
  }
}

// ---------------------------------------------------------------------------
// wiring

function defaultSpace(): string {
  return JSON.stringify(
    {
      dimensions: [
        {
          name: "spec",
          binding: { target: "specularity", part: "pad" },
          lo: 0.1,
          hi: 0.9,
          grid: 9,
        },
      ],
    },
    null,
    2,
  );
}

export function init(): void {
  ($("space-json") as HTMLTextAreaElement).value = defaultSpace();

  $("load-form").addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const id = ($("design-id") as HTMLInputElement).value.trim();
    try {
      await loadDesign(await client.getDesign(id));
    } catch (err) {
      toast(err instanceof ApiError ? err.record.message : String(err));
    }
  });

  $("upload-form").addEventListener("submit", async (ev) => {
    ev.preventDefault();
    try {
      const doc = JSON.parse(($("design-json") as HTMLTextAreaElement).value);
      const resp = await client.postDesign(doc);
      ($("design-id") as HTMLInputElement).value = resp.id;
      await loadDesign(resp);
    } catch (err) {
      toast(err instanceof ApiError ? err.record.message : String(err));
    }
  });

  $("score-form").addEventListener("submit", async (ev) => {
    ev.preventDefault();
    // expensive objectives run only on explicit request
    for (const objective of ["rgb2normal", "normdiff"]) {
      try {
        const job = await client.postJob({
          kind: "evaluate",
          design_id: view.id,
          request: {
            objective,
            config: { locations: 4,
                      render: { iterations: 2, photons_per_iter: 10000 } },
          },
        });
        const done = await pollJob(client, job.id, (j) => {
          jobs = upsert(j);
          renderJobs();
        });
        if (done.state === "done") {
          const report = await client.getResult<{ score: number }>(job.id);
          view = applyScore(view, objective, report.score);
        }
      } catch (err) {
        toast(String(err));
      }
    }
    renderDesign();
  });

  $("opt-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    void launchOptimization();
  });
  $("apply-best").addEventListener("click", () => void applyBest());

  renderDesign();
  renderJobs();
}

if (typeof document !== "undefined" && document.getElementById("load-form")) {
  init();
}
