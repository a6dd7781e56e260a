// Slider-to-service plumbing: debounced commits of model parameters,
// with client-side constraint mirroring and revert-on-reject.

import { ApiClient, ServiceError } from "./api.js";
import { validateParams } from "./state.js";
import type { SessionParams } from "./types.js";

/** Collapses bursts of calls into one, after a quiet period. */
export class Debouncer {
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(public readonly quietMs = 150) {}

  schedule(fn: () => void): void {
    this.cancel();
    this.timer = setTimeout(() => {
      this.timer = null;
      fn();
    }, this.quietMs);
  }

  cancel(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  get pending(): boolean {
    return this.timer !== null;
  }
}

export interface ParamEditorEvents {
  /** Accepted by the service: caches for these families were refreshed. */
  onAccepted(params: SessionParams, invalidated: string[]): void;
  /** Rejected (client mirror or service 400): sliders show `reverted`. */
  onRejected(field: string, message: string, reverted: SessionParams): void;
}

export class ParamEditor {
  private staged: SessionParams;
  private accepted: SessionParams;
  private readonly debounce: Debouncer;
  private inflight: Promise<void> = Promise.resolve();

  constructor(
    private readonly api: ApiClient,
    initial: SessionParams,
    private readonly events: ParamEditorEvents,
    quietMs = 150,
  ) {
    this.staged = { ...initial };
    this.accepted = { ...initial };
    this.debounce = new Debouncer(quietMs);
  }

  get lastAccepted(): SessionParams {
    return { ...this.accepted };
  }

  get current(): SessionParams {
    return { ...this.staged };
  }

  /** Stage a slider value; the commit happens after the quiet period. */
  stage(field: keyof SessionParams, value: number): void {
    this.staged = { ...this.staged, [field]: value };
    this.debounce.schedule(() => this.commit());
  }

  /** Serialized commit chain; resolves when the POST settles. */
  commitNow(): Promise<void> {
    this.debounce.cancel();
    return this.commit();
  }

  private commit(): Promise<void> {
    const candidate = { ...this.staged };
    const violation = validateParams(candidate);
    if (violation) {
      this.staged = { ...this.accepted };
      this.events.onRejected(violation.field, violation.message, this.lastAccepted);
      return Promise.resolve();
    }
    this.inflight = this.inflight.then(async () => {
      try {
        const reply = await this.api.postParams(candidate);
        this.accepted = { ...reply.params };
        this.staged = { ...reply.params };
        this.events.onAccepted(this.lastAccepted, reply.invalidated ?? []);
      } catch (err) {
        this.staged = { ...this.accepted };
        if (err instanceof ServiceError && err.status === 400) {
          const payload = err.payload as { error?: string } | null;
          this.events.onRejected(err.field ?? "params",
                                 payload?.error ?? "rejected by service",
                                 this.lastAccepted);
        } else {
          this.events.onRejected("service", String(err), this.lastAccepted);
        }
      }
    });
    return this.inflight;
  }
}
