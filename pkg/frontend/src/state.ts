// Central view state with unidirectional updates: views call update(), the
// router and charts react through subscribe(). All aggregation stays on the
// server; this store only tracks what to ask for.

export type ViewName = "dashboard" | "network" | "transactions" | "chaincodes";

export const GRANULARITIES = ["1m", "1h", "12h", "24h"] as const;
export type Granularity = (typeof GRANULARITIES)[number];

export interface ViewState {
  view: ViewName;
  range: [number, number]; // half-open [from, to)
  granularity: Granularity;
  brush: [number, number] | null; // sub-range of `range`, or null for all
  chaincode: string | null;
  msp: string | null;
}

export type StatePatch = Partial<ViewState>;
export type Listener = (state: ViewState, patch: StatePatch) => void;

export function clampBrush(
  brush: [number, number] | null,
  range: [number, number],
): [number, number] | null {
  if (!brush) return null;
  const lo = Math.max(Math.min(brush[0], brush[1]), range[0]);
  const hi = Math.min(Math.max(brush[0], brush[1]), range[1]);
  if (hi <= lo) return null;
  if (lo === range[0] && hi === range[1]) return null; // full range == no brush
  return [lo, hi];
}

export class AppStore {
  private state: ViewState;
  private listeners = new Set<Listener>();

  constructor(initial?: Partial<ViewState>) {
    const now = Date.now();
    this.state = {
      view: "dashboard",
      range: [now - 2 * 3_600_000, now],
      granularity: "1m",
      brush: null,
      chaincode: null,
      msp: null,
      ...initial,
    };
    this.state.brush = clampBrush(this.state.brush, this.state.range);
  }

  get(): ViewState {
    return { ...this.state };
  }

  /** The brushed range if any, else the full selected range. */
  effectiveRange(): [number, number] {
    return this.state.brush ?? this.state.range;
  }

  update(patch: StatePatch): void {
    if (patch.granularity && !GRANULARITIES.includes(patch.granularity)) {
      throw new Error(`unknown granularity ${patch.granularity}`);
    }
    const next: ViewState = { ...this.state, ...patch };
    if (patch.range) {
      // A new outer range invalidates any brush that falls outside it.
      next.brush = clampBrush(patch.brush ?? this.state.brush, patch.range);
    } else if ("brush" in patch) {
      next.brush = clampBrush(patch.brush ?? null, next.range);
    }
    this.state = next;
    for (const listener of this.listeners) {
      listener(this.get(), patch);
    }
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }
}
