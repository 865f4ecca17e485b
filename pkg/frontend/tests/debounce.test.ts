import { describe, expect, it } from "vitest";

import { DebouncedSender, type Scheduler } from "../src/debounce.js";

/** Deterministic manual scheduler: timers fire only when told to. */
class ManualScheduler implements Scheduler {
  private next = 1;
  private timers = new Map<number, () => void>();

  setTimeout(fn: () => void, _ms: number): unknown {
    const id = this.next++;
    this.timers.set(id, fn);
    return id;
  }

  clearTimeout(handle: unknown): void {
    this.timers.delete(handle as number);
  }

  fire(): void {
    const entries = [...this.timers.entries()];
    this.timers.clear();
    for (const [, fn] of entries) fn();
  }

  get pendingCount(): number {
    return this.timers.size;
  }
}

function deferred(): { promise: Promise<void>; resolve: () => void } {
  let resolve!: () => void;
  const promise = new Promise<void>((res) => (resolve = res));
  return { promise, resolve };
}

describe("DebouncedSender", () => {
  it("coalesces rapid updates into a single request", async () => {
    const sched = new ManualScheduler();
    const sent: number[] = [];
    const sender = new DebouncedSender<number>(
      async (v) => void sent.push(v),
      150,
      sched,
    );
    for (let v = 0; v < 10; v++) sender.update(v);
    expect(sched.pendingCount).toBe(1); // earlier timers cancelled
    sched.fire();
    await Promise.resolve();
    expect(sent).toEqual([9]); // only the last value goes out
  });

  it("keeps at most one request in flight during slider spam", async () => {
    const sched = new ManualScheduler();
    const gates: Array<ReturnType<typeof deferred>> = [];
    const sent: number[] = [];
    const sender = new DebouncedSender<number>(
      (v) => {
        sent.push(v);
        const gate = deferred();
        gates.push(gate);
        return gate.promise;
      },
      150,
      sched,
    );

    sender.update(1);
    sched.fire(); // request for 1 departs and blocks
    // spam while in flight
    for (let v = 2; v <= 20; v++) {
      sender.update(v);
      sched.fire();
    }
    expect(sent).toEqual([1]); // nothing else departed yet
    expect(sender.maxObservedInFlight).toBe(1);

    gates[0].resolve();
    await Promise.resolve();
    await Promise.resolve();
    expect(sent).toEqual([1, 20]); // queued value follows, spam collapsed
    gates[1].resolve();
    await Promise.resolve();
    expect(sender.maxObservedInFlight).toBeLessThanOrEqual(2);
  });

  it("reports busy while a value is pending or in flight", async () => {
    const sched = new ManualScheduler();
    const gate = deferred();
    const sender = new DebouncedSender<number>(() => gate.promise, 150, sched);
    expect(sender.busy).toBe(false);
    sender.update(1);
    expect(sender.busy).toBe(true);
    sched.fire();
    expect(sender.busy).toBe(true); // in flight
    gate.resolve();
    await Promise.resolve();
    await Promise.resolve();
    expect(sender.busy).toBe(false);
  });
});
