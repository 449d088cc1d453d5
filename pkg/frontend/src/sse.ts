// Live alert feed: server-sent events when available, 10-second polling of
// /alerts otherwise. Each alert is delivered to the handler exactly once
// per page session (keyed by alert_id).

import type { ApiClient } from "./api.js";
import type { Alert } from "./types.js";

const POLL_FALLBACK_MS = 10_000;

export type AlertHandler = (alert: Alert) => void;

export interface EventSourceLike {
  onmessage: ((event: { data: string }) => void) | null;
  onerror: ((event: unknown) => void) | null;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export class AlertFeed {
  private seen = new Set<string>();
  private source: EventSourceLike | null = null;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private stopped = false;

  constructor(
    private api: ApiClient,
    private onAlert: AlertHandler,
    private makeEventSource?: EventSourceFactory,
    private pollMs = POLL_FALLBACK_MS,
  ) {}

  start(): void {
    this.stopped = false;
    const factory = this.makeEventSource
      ?? (typeof EventSource !== "undefined"
        ? (url: string) => new EventSource(url) as EventSourceLike
        : undefined);
    if (factory) {
      try {
        this.source = factory(this.api.alertStreamUrl());
        this.source.onmessage = (event) => this.deliver(JSON.parse(event.data) as Alert);
        this.source.onerror = () => this.fallbackToPolling();
        return;
      } catch {
        this.source = null;
      }
    }
    this.fallbackToPolling();
  }

  /** Mark existing alerts as seen so only new ones count as "pushed". */
  prime(alerts: Alert[]): void {
    for (const alert of alerts) this.seen.add(alert.alert_id);
  }

  private deliver(alert: Alert): void {
    if (this.stopped || this.seen.has(alert.alert_id)) return;
    this.seen.add(alert.alert_id);
    this.onAlert(alert);
  }

  private fallbackToPolling(): void {
    if (this.stopped || this.pollTimer) return;
    this.source?.close();
    this.source = null;
    const poll = async () => {
      try {
        const alerts = await this.api.alerts(0);
        for (const alert of [...alerts].reverse()) this.deliver(alert);
      } catch {
        // keep polling; the offline banner is the dashboard's concern
      }
    };
    void poll();
    this.pollTimer = setInterval(poll, this.pollMs);
  }

  stop(): void {
    this.stopped = true;
    this.source?.close();
    this.source = null;
    if (this.pollTimer) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }
}
