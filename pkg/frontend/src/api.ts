/** Thin typed client for the studio HTTP service.
 *
 * Every number the UI displays comes through here; the client performs
 * no physics of its own.  `fetchFn` is injectable for tests.
 */

import type {
  Binding,
  DesignDocument,
  DesignResponse,
  ErrorRecord,
  JobRecord,
  OptimizeResult,
} from "./types.js";

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly record: ErrorRecord;
  readonly status: number;

  constructor(status: number, record: ErrorRecord) {
    super(`${record.error}: ${record.message}`);
    this.status = status;
    this.record = record;
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let record: ErrorRecord;
    try {
      record = (await resp.json()) as ErrorRecord;
    } catch {
      record = { error: `HTTP${resp.status}`, message: resp.statusText };
    }
    throw new ApiError(resp.status, record);
  }
  return (await resp.json()) as T;
}

export class StudioClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchFn = (u, i) => fetch(u, i),
  ) {}

  getLibrary(): Promise<Record<string, unknown>> {
    return this.fetchFn(`${this.base}/library`).then((r) =>
      asJson<Record<string, unknown>>(r),
    );
  }

  getDesign(id: string): Promise<DesignResponse> {
    return this.fetchFn(`${this.base}/designs/${id}`).then((r) =>
      asJson<DesignResponse>(r),
    );
  }

  postDesign(document: DesignDocument, name?: string): Promise<DesignResponse> {
    return this.fetchFn(`${this.base}/designs`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ name, document }),
    }).then((r) => asJson<DesignResponse>(r));
  }

  patchParams(
    id: string,
    params: Array<{ binding: Binding; value: number | string }>,
  ): Promise<DesignResponse> {
    return this.fetchFn(`${this.base}/designs/${id}/params`, {
      method: "PATCH",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ params }),
    }).then((r) => asJson<DesignResponse>(r));
  }

  /** Preview endpoint URL; version is a cache-buster so a stale image is
   * never re-shown for a newer design. */
  previewUrl(id: string, version: number, seed = 0): string {
    return `${this.base}/designs/${id}/preview?seed=${seed}&v=${version}`;
  }

  /** Fetch a preview and report which design version the server rendered. */
  async fetchPreview(
    id: string,
    version: number,
    seed = 0,
  ): Promise<{ blob: Blob; version: number }> {
    const resp = await this.fetchFn(this.previewUrl(id, version, seed));
    if (!resp.ok) {
      throw new ApiError(resp.status, {
        error: `HTTP${resp.status}`,
        message: resp.statusText,
      });
    }
    const echoed = Number(resp.headers.get("X-Design-Version") ?? version);
    return { blob: await resp.blob(), version: echoed };
  }

  postJob(body: Record<string, unknown>): Promise<JobRecord> {
    return this.fetchFn(`${this.base}/jobs`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => asJson<JobRecord>(r));
  }

  getJob(id: string): Promise<JobRecord> {
    return this.fetchFn(`${this.base}/jobs/${id}`).then((r) =>
      asJson<JobRecord>(r),
    );
  }

  getOptimizeResult(id: string): Promise<OptimizeResult> {
    return this.fetchFn(`${this.base}/jobs/${id}/result`).then((r) =>
      asJson<OptimizeResult>(r),
    );
  }

  getResult<T>(id: string): Promise<T> {
    return this.fetchFn(`${this.base}/jobs/${id}/result`).then((r) =>
      asJson<T>(r),
    );
  }
}

/** Poll a job until it reaches a final state.
 *
 * 500 ms base interval with gentle backoff (x1.5 up to 5 s); progress
 * callbacks fire on every response.
 */
export async function pollJob(
  client: StudioClient,
  jobId: string,
  onProgress?: (job: JobRecord) => void,
  sleep: (ms: number) => Promise<void> = (ms) =>
    new Promise((res) => setTimeout(res, ms)),
): Promise<JobRecord> {
  let interval = 500;
  for (;;) {
    const job = await client.getJob(jobId);
    onProgress?.(job);
    if (job.state === "done" || job.state === "failed") return job;
    await sleep(interval);
    interval = Math.min(interval * 1.5, 5000);
  }
}
