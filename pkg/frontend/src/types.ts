/** Server-side document and job shapes, mirrored from the HTTP API. */

export interface Binding {
  target: string;
  part?: string;
  index?: number;
  light?: number;
  axis?: number;
  group?: string;
}

export interface LightDoc {
  name: string;
  preset: string;
  position: number[];
  orientation: number[];
  color: string;
  group: string;
  scale?: number;
}

export interface PartDoc {
  name: string;
  role: string;
  mesh: string;
  material: unknown;
  cage?: { c_min_offset?: number[][]; c_max_offset?: number[][]; alpha?: number[][] };
}

export interface DesignDocument {
  schema_version: number;
  parts: PartDoc[];
  lights: LightDoc[];
  camera: Record<string, unknown>;
  indentations?: Record<string, unknown>;
}

export interface PartReport {
  name: string;
  role: string;
  material: string;
  faces: number;
  caged: boolean;
}

export interface ValidationReport {
  name: string;
  parts: PartReport[];
  light_groups: string[];
  camera: Record<string, unknown>;
  roles: Record<string, string[]>;
}

export interface DesignResponse {
  id: string;
  name?: string;
  version: number;
  document: DesignDocument;
  report: ValidationReport;
}

export interface ErrorRecord {
  error: string;
  message: string;
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface JobRecord {
  id: string;
  kind: string;
  state: JobState;
  progress: number;
  error?: string | null;
}

export interface HistoryEntry {
  params: Array<number | string>;
  score: number;
  seconds: number;
}

export interface OptimizeResult {
  method: string;
  objective: string;
  budget: number;
  evaluations: number;
  best_score: number;
  best_params: Array<number | string>;
  history: HistoryEntry[];
}

export interface ObjectiveReportJson {
  objective: string;
  score: number;
  breakdown: Record<string, unknown>;
}
