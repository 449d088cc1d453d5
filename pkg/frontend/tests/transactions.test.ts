import { describe, expect, it } from "vitest";

import { AppStore } from "../src/state.js";
import type { TransactionsPayload } from "../src/types.js";
import { renderTransactions } from "../src/views/transactions.js";
import { fakeApi, fixture, mouse } from "./helpers.js";

const FULL = fixture<TransactionsPayload>("transactions_full.json");
const WINDOW = fixture<TransactionsPayload>("transactions_flood_window.json");
const MIN = 60_000;

// The brushed fixture covers [flood start - 5 min, flood end + 5 min).
const BRUSH_LO = WINDOW.from_ms;
const BRUSH_HI = WINDOW.to_ms;

function route(url: URL): unknown {
  if (!url.pathname.endsWith("/transactions")) return undefined;
  const from = Number(url.searchParams.get("from"));
  const to = Number(url.searchParams.get("to"));
  const span = to - from;
  return span < (FULL.to_ms - FULL.from_ms) / 2 ? WINDOW : FULL;
}

function setup() {
  const { api, calls } = fakeApi(route);
  const store = new AppStore({
    range: [FULL.from_ms, FULL.to_ms],
    granularity: "1m",
    view: "transactions",
  });
  const root = document.createElement("div");
  document.body.append(root);
  const view = renderTransactions(root, api, store);
  return { api, calls, store, root, view };
}

describe("transactions view", () => {
  it("granularity dropdown offers exactly 1m, 1h, 12h, 24h", async () => {
    const { root, view } = setup();
    await view.pending;
    const options = [...root.querySelectorAll(
      '[data-testid="granularity-select"] option')].map((o) => (o as HTMLOptionElement).value);
    expect(options).toEqual(["1m", "1h", "12h", "24h"]);
  });

  it("initially loads the full range into navigator and detail charts", async () => {
    const { root, view, calls } = setup();
    await view.pending;
    expect(root.querySelectorAll('[data-testid="navigator"] rect.nav-bar').length)
      .toBe(FULL.buckets.length);
    expect(view.lastDetail?.row_total).toBe(FULL.row_total);
    const urls = calls.map((u) => `${u.searchParams.get("from")}-${u.searchParams.get("to")}`);
    expect(urls).toContain(`${FULL.from_ms}-${FULL.to_ms}`);
  });

  it("brushing the flood window refetches stacked bars, scatter, area and table", async () => {
    const { root, view, store, calls } = setup();
    await view.pending;
    calls.length = 0;

    // Drag over the navigator: pixel x maps linearly onto the full range.
    const overlay = root.querySelector(
      '[data-testid="navigator"] rect.brush-overlay')!;
    const span = FULL.to_ms - FULL.from_ms;
    const px = (ts: number) => ((ts - FULL.from_ms) / span) * 800;
    overlay.dispatchEvent(mouse("mousedown", px(BRUSH_LO)));
    overlay.dispatchEvent(mouse("mouseup", px(BRUSH_HI)));
    await view.pending;

    // State holds the (rounded) brush and the detail fetch used it.
    const brush = store.get().brush!;
    expect(Math.abs(brush[0] - BRUSH_LO)).toBeLessThan(MIN);
    expect(Math.abs(brush[1] - BRUSH_HI)).toBeLessThan(MIN);
    const detailCall = calls.find((u) => u.pathname.endsWith("/transactions"))!;
    expect(Number(detailCall.searchParams.get("from"))).toBe(brush[0]);
    expect(Number(detailCall.searchParams.get("to"))).toBe(brush[1]);

    // Server data for the window drove all four linked displays.
    expect(view.lastDetail?.row_total).toBe(WINDOW.row_total);
    const segments = root.querySelectorAll('[data-testid="stacked-bars"] rect.stack-segment');
    const expectedSegments = WINDOW.buckets.reduce(
      (acc, b) => acc + Object.keys(b.counts_by_msp).length, 0);
    expect(segments.length).toBe(expectedSegments);
    const burst = Math.max(...[...segments].map((s) => Number(s.getAttribute("data-count"))));
    expect(burst).toBe(Math.max(
      ...WINDOW.buckets.flatMap((b) => Object.values(b.counts_by_msp))));
    const marks = root.querySelectorAll('[data-testid="size-scatter"] circle.size-mark');
    const expectedMarks = WINDOW.buckets.reduce(
      (acc, b) => acc + Object.keys(b.avg_size_by_msp).length, 0);
    expect(marks.length).toBe(expectedMarks);
    expect(root.querySelectorAll('[data-testid="latency-area"] polygon.latency-band')
      .length).toBeGreaterThan(0);
    expect(root.querySelector('[data-testid="row-count"]')!.textContent)
      .toContain(String(WINDOW.row_total));
    expect(root.querySelectorAll('[data-testid="tx-table"] tr.tx-row').length)
      .toBe(WINDOW.rows.length);
  });

  it("row expansion reveals the full read/write set", async () => {
    const { root, view } = setup();
    await view.pending;
    const row = root.querySelector("tr.tx-row") as HTMLElement;
    row.click();
    const detail = root.querySelector("tr.rw-detail pre.rw-set")!;
    const first = FULL.rows[0];
    if (first.write_set.length) {
      expect(detail.textContent).toContain(first.write_set[0].key);
    }
    row.click();
    expect(root.querySelector("tr.rw-detail")).toBeNull();
  });

  it("legend toggles restack without refetching", async () => {
    const { root, view, calls } = setup();
    await view.pending;
    calls.length = 0;
    const box = root.querySelector(
      'input[data-series="ordering_latency"]') as HTMLInputElement;
    box.checked = false;
    box.dispatchEvent(new Event("change"));
    const bands = root.querySelectorAll('[data-testid="latency-area"] polygon.latency-band');
    const series = new Set([...bands].map((b) => b.getAttribute("data-series")));
    expect(series.has("ordering_latency")).toBe(false);
    expect(series.size).toBe(2);
    expect(calls.length).toBe(0); // presentation-only
  });

  it("chaincode filter flows into the query", async () => {
    const { root, view, calls, store } = setup();
    await view.pending;
    calls.length = 0;
    (root.querySelector('[data-testid="chaincode-filter"]') as HTMLInputElement).value = "assetcc";
    (root.querySelector('[data-testid="apply"]') as HTMLElement).click();
    await view.pending;
    expect(store.get().chaincode).toBe("assetcc");
    expect(calls.every((u) => u.searchParams.get("chaincode") === "assetcc")).toBe(true);
  });

  it("rapid brushing applies only the newest selection (latest wins)", async () => {
    const { root, view } = setup();
    await view.pending;
    const overlay = root.querySelector(
      '[data-testid="navigator"] rect.brush-overlay')!;
    const span = FULL.to_ms - FULL.from_ms;
    const px = (ts: number) => ((ts - FULL.from_ms) / span) * 800;
    overlay.dispatchEvent(mouse("mousedown", px(FULL.from_ms + 10 * MIN)));
    overlay.dispatchEvent(mouse("mouseup", px(FULL.from_ms + 30 * MIN)));
    const first = view.pending;
    overlay.dispatchEvent(mouse("mousedown", px(BRUSH_LO)));
    overlay.dispatchEvent(mouse("mouseup", px(BRUSH_HI)));
    await Promise.all([first, view.pending]);
    expect(view.lastDetail?.row_total).toBe(WINDOW.row_total);
  });
});
