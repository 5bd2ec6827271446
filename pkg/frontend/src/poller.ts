// Live-view polling loop. One timer, one in-flight request at a time: if a
// tick fires while the previous round trip is still running, that tick is
// skipped rather than queued, so a slow server never stacks requests.

import { ApiError, Unauthorized } from "./api.js";
import type { FrameResult, StateDocument } from "./api.js";
import { frameQuery } from "./settings.js";
import type { ViewerSettings } from "./settings.js";

/** The slice of the API client the poller needs. */
export interface PollClient {
  state(): Promise<StateDocument>;
  frame(query: URLSearchParams): Promise<FrameResult>;
}

export interface PollerEvents {
  onFrame?: (frame: FrameResult) => void;
  onState?: (state: StateDocument) => void;
  /** Frame withheld but the server is alive (e.g. 503 before the first
   *  capture, 409 while disarmed). */
  onFrameUnavailable?: (status: number, detail: string) => void;
  onStale?: (stale: boolean) => void;
  onUnauthorized?: () => void;
  /** Fires with the query string at the moment each poll round starts. */
  onRequest?: (query: string) => void;
}

// After repeated network failures the period doubles, capped at 8x the
// configured interval; one success snaps it back.
const BACKOFF_CAP = 8;

export class FramePoller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;
  private failures = 0;
  private period = 0;
  private stale = false;

  constructor(
    private readonly client: PollClient,
    private readonly settings: () => ViewerSettings,
    private readonly events: PollerEvents = {},
  ) {}

  get running(): boolean {
    return this.timer !== null;
  }

  start(): void {
    if (this.timer) return;
    this.failures = 0;
    this.stale = false;
    this.schedule(this.settings().pollIntervalMs);
  }

  stop(): void {
    if (this.timer) clearInterval(this.timer);
    this.timer = null;
  }

  private schedule(period: number): void {
    if (this.timer) clearInterval(this.timer);
    this.period = period;
    this.timer = setInterval(() => void this.tick(), period);
  }

  private async tick(): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    const base = this.settings().pollIntervalMs;
    try {
      const query = frameQuery(this.settings());
      this.events.onRequest?.(query.toString());
      const state = await this.client.state();
      this.events.onState?.(state);
      try {
        const frame = await this.client.frame(query);
        this.events.onFrame?.(frame);
      } catch (err) {
        // 4xx (disarmed, bad settings) and 503 (no capture yet) are expected
        // answers from a healthy server; anything else is a real failure.
        if (!(err instanceof ApiError) || (err.status >= 500 && err.status !== 503)) throw err;
        this.events.onFrameUnavailable?.(err.status, err.message);
      }
      this.markAlive(base);
    } catch (err) {
      if (err instanceof Unauthorized) {
        this.stop();
        this.events.onUnauthorized?.();
      } else {
        this.markFailed(base);
      }
    } finally {
      this.inFlight = false;
    }
  }

  private markAlive(base: number): void {
    this.failures = 0;
    if (this.stale) {
      this.stale = false;
      this.events.onStale?.(false);
    }
    // Also picks up a changed poll interval from the settings form.
    if (this.period !== base) this.schedule(base);
  }

  private markFailed(base: number): void {
    this.failures += 1;
    // Two consecutive misses mean the picture is two intervals old: stale.
    if (!this.stale && this.failures >= 2) {
      this.stale = true;
      this.events.onStale?.(true);
    }
    // The first retry keeps the normal cadence; after that, back off
    // geometrically so a dead server is not hammered.
    const factor = Math.min(2 ** Math.max(0, this.failures - 1), BACKOFF_CAP);
    const next = base * factor;
    if (this.timer && next !== this.period) this.schedule(next);
  }
}
