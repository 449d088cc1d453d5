// Thin typed client over /api/v1. The base URL resolves (in order) from an
// explicit constructor argument, the LEDGERWATCH_API global set at runtime,
// a <meta name="ledgerwatch-api"> tag baked in at build time, or the page's
// own origin (the service can serve the bundle itself).

import type {
  Alert,
  ChaincodeSummary,
  Issue,
  LogLine,
  NetworkPayload,
  ScanReport,
  StatusResponse,
  TransactionsPayload,
} from "./types.js";

declare global {
  // eslint-disable-next-line no-var
  var LEDGERWATCH_API: string | undefined;
}

export function resolveBaseUrl(explicit?: string): string {
  if (explicit) return explicit.replace(/\/$/, "");
  if (typeof globalThis.LEDGERWATCH_API === "string") {
    return globalThis.LEDGERWATCH_API.replace(/\/$/, "");
  }
  if (typeof document !== "undefined") {
    const meta = document.querySelector('meta[name="ledgerwatch-api"]');
    const content = meta?.getAttribute("content");
    if (content) return content.replace(/\/$/, "");
  }
  return "";
}

export interface TransactionsQuery {
  from: number;
  to: number;
  granularity: string;
  chaincode?: string | null;
  msp?: string | null;
  page_size?: number;
  cursor?: string | null;
}

export interface LogsQuery {
  node?: string | null;
  level?: string;
  from?: number;
  to?: number;
  limit?: number;
}

type Fetcher = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  readonly base: string;
  private fetcher: Fetcher;

  constructor(baseUrl?: string, fetcher?: Fetcher) {
    this.base = resolveBaseUrl(baseUrl);
    this.fetcher = fetcher ?? ((url, init) => fetch(url, init));
  }

  url(path: string, params?: Record<string, string | number | null | undefined>): string {
    const query = new URLSearchParams();
    for (const [key, value] of Object.entries(params ?? {})) {
      if (value !== null && value !== undefined && value !== "") {
        query.set(key, String(value));
      }
    }
    const qs = query.toString();
    return `${this.base}/api/v1${path}${qs ? `?${qs}` : ""}`;
  }

  private async getJson<T>(url: string, init?: RequestInit): Promise<T> {
    const response = await this.fetcher(url, init);
    if (!response.ok) {
      throw new Error(`GET ${url} -> ${response.status}`);
    }
    return (await response.json()) as T;
  }

  status(): Promise<StatusResponse> {
    return this.getJson(this.url("/status"));
  }

  issues(): Promise<Issue[]> {
    return this.getJson(this.url("/issues"));
  }

  alerts(since = 0): Promise<Alert[]> {
    return this.getJson(this.url("/alerts", { since }));
  }

  network(at?: number): Promise<NetworkPayload> {
    return this.getJson(this.url("/network", { at }));
  }

  logs(query: LogsQuery): Promise<{ lines: LogLine[] }> {
    return this.getJson(this.url("/logs", {
      node: query.node,
      level: query.level,
      from: query.from,
      to: query.to,
      limit: query.limit,
    }));
  }

  transactions(query: TransactionsQuery, init?: RequestInit): Promise<TransactionsPayload> {
    return this.getJson(this.url("/transactions", {
      from: query.from,
      to: query.to,
      granularity: query.granularity,
      chaincode: query.chaincode,
      msp: query.msp,
      page_size: query.page_size,
      cursor: query.cursor,
    }), init);
  }

  chaincodes(): Promise<ChaincodeSummary[]> {
    return this.getJson(this.url("/chaincodes"));
  }

  chaincodeScans(name: string): Promise<ScanReport[]> {
    return this.getJson(this.url(`/chaincodes/${encodeURIComponent(name)}/scans`));
  }

  alertStreamUrl(): string {
    return this.url("/alerts/stream");
  }
}

/**
 * Latest-wins request gate: at most one in-flight request per key. Starting
 * a new one aborts the previous, so rapid brushing never applies stale data.
 */
export class LatestWins {
  private inflight = new Map<string, AbortController>();

  async run<T>(key: string, job: (signal: AbortSignal) => Promise<T>): Promise<T | null> {
    this.inflight.get(key)?.abort();
    const controller = new AbortController();
    this.inflight.set(key, controller);
    try {
      const result = await job(controller.signal);
      return controller.signal.aborted ? null : result;
    } catch (err) {
      if (controller.signal.aborted) return null; // superseded, not an error
      throw err;
    } finally {
      if (this.inflight.get(key) === controller) {
        this.inflight.delete(key);
      }
    }
  }
}
