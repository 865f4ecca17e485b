/** Debounced, single-flight async dispatcher for parameter steering.
 *
 * Slider spam must coalesce: while a request is in flight, new values
 * only overwrite the pending slot, so at most one request is in flight
 * and at most one is queued behind it (<= 2 outstanding by contract).
 */

export interface Scheduler {
  setTimeout(fn: () => void, ms: number): unknown;
  clearTimeout(handle: unknown): void;
}

const realScheduler: Scheduler = {
  setTimeout: (fn, ms) => setTimeout(fn, ms),
  clearTimeout: (h) => clearTimeout(h as ReturnType<typeof setTimeout>),
};

export class DebouncedSender<T> {
  private pending: T | undefined;
  private timer: unknown = null;
  private inFlight = false;
  private flightCount = 0;
  maxObservedInFlight = 0;

  constructor(
    private readonly send: (value: T) => Promise<void>,
    private readonly delayMs = 150,
    private readonly scheduler: Scheduler = realScheduler,
  ) {}

  /** Submit a new value; earlier unsent values are dropped. */
  update(value: T): void {
    this.pending = value;
    if (this.timer !== null) this.scheduler.clearTimeout(this.timer);
    this.timer = this.scheduler.setTimeout(() => {
      this.timer = null;
      void this.flush();
    }, this.delayMs);
  }

  get busy(): boolean {
    return this.inFlight || this.pending !== undefined;
  }

  private async flush(): Promise<void> {
    if (this.inFlight || this.pending === undefined) return;
    const value = this.pending;
    this.pending = undefined;
    this.inFlight = true;
    this.flightCount += 1;
    this.maxObservedInFlight = Math.max(this.maxObservedInFlight, this.flightCount);
    try {
      await this.send(value);
    } finally {
      this.inFlight = false;
      this.flightCount -= 1;
      if (this.pending !== undefined) void this.flush();
    }
  }
}
