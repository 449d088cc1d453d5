// Transaction explorer: range and granularity controls, a full-range
// navigator with a horizontal brush, and three linked visualizations plus
// the transaction table, all re-fetched from the server for the brushed
// range (the server owns every aggregate).

import { ApiClient, LatestWins } from "../api.js";
import {
  latencyAreaChart,
  navigatorChart,
  sizeScatterChart,
  stackedBarChart,
} from "../charts.js";
import { clear, el } from "../dom.js";
import {
  fmtBytes,
  fmtTime,
  LATENCY_SERIES,
  LatencySeriesKey,
  mspColors,
} from "../format.js";
import { AppStore, GRANULARITIES, Granularity } from "../state.js";
import type { TransactionsPayload, TxRow } from "../types.js";

const GRANULARITY_MS: Record<Granularity, number> = {
  "1m": 60_000,
  "1h": 3_600_000,
  "12h": 43_200_000,
  "24h": 86_400_000,
};

export interface TransactionsController {
  pending: Promise<void>;
  lastDetail: TransactionsPayload | null;
  refetchAll(): Promise<void>;
}

export function renderTransactions(
  root: HTMLElement,
  api: ApiClient,
  store: AppStore,
): TransactionsController {
  clear(root);
  const gate = new LatestWins();

  // -- controls (A) ---------------------------------------------------------
  const fromInput = el("input", {
    type: "number", class: "ts-input", "data-testid": "from-input",
  }) as HTMLInputElement;
  const toInput = el("input", {
    type: "number", class: "ts-input", "data-testid": "to-input",
  }) as HTMLInputElement;
  const granularitySelect = el("select", {
    class: "granularity", "data-testid": "granularity-select",
  }) as HTMLSelectElement;
  for (const token of GRANULARITIES) {
    granularitySelect.append(el("option", { value: token }, token));
  }
  const chaincodeInput = el("input", {
    type: "text", placeholder: "chaincode filter", "data-testid": "chaincode-filter",
  }) as HTMLInputElement;
  const mspInput = el("input", {
    type: "text", placeholder: "MSP filter", "data-testid": "msp-filter",
  }) as HTMLInputElement;
  const applyButton = el("button", { "data-testid": "apply" }, "apply");
  const clearBrushButton = el("button", { "data-testid": "clear-brush" }, "clear brush");

  const controls = el("div", { class: "controls" },
    el("label", {}, "from ", fromInput),
    el("label", {}, "to ", toInput),
    el("label", {}, "granularity ", granularitySelect),
    chaincodeInput, mspInput, applyButton, clearBrushButton);

  // -- chart slots ------------------------------------------------------------
  const navigatorSlot = el("div", { class: "slot", "data-testid": "navigator" });
  const stackedSlot = el("div", { class: "slot", "data-testid": "stacked-bars" });
  const scatterSlot = el("div", { class: "slot", "data-testid": "size-scatter" });
  const areaSlot = el("div", { class: "slot", "data-testid": "latency-area" });
  const legend = el("div", { class: "legend", "data-testid": "latency-legend" });
  const tableSlot = el("div", { class: "slot", "data-testid": "tx-table" });
  const notice = el("p", { class: "empty-state hidden", "data-testid": "empty-notice" },
    "No transactions in the selected range.");

  root.append(
    controls,
    el("h3", {}, "Range navigator"), navigatorSlot,
    notice,
    el("h3", {}, "Transactions by organization"), stackedSlot,
    el("h3", {}, "Mean transaction size"), scatterSlot,
    el("h3", {}, "Processing latency (s)"), areaSlot, legend,
    el("h3", {}, "Transactions"), tableSlot,
  );

  const enabledSeries = new Set<LatencySeriesKey>(LATENCY_SERIES.map((s) => s.key));
  let lastDetailPayload: TransactionsPayload | null = null;

  for (const spec of LATENCY_SERIES) {
    const box = el("input", {
      type: "checkbox", "data-series": spec.key,
    }) as HTMLInputElement;
    box.checked = true;
    box.addEventListener("change", () => {
      if (box.checked) enabledSeries.add(spec.key);
      else enabledSeries.delete(spec.key);
      if (lastDetailPayload) paintArea(lastDetailPayload); // presentation-only
    });
    legend.append(el("label", { class: "legend-item", style: `color:${spec.color}` },
      box, ` ${spec.label}`));
  }

  const syncControls = () => {
    const s = store.get();
    fromInput.value = String(s.range[0]);
    toInput.value = String(s.range[1]);
    granularitySelect.value = s.granularity;
    chaincodeInput.value = s.chaincode ?? "";
    mspInput.value = s.msp ?? "";
  };

  const paintNavigator = (payload: TransactionsPayload) => {
    const s = store.get();
    clear(navigatorSlot);
    navigatorSlot.append(navigatorChart(
      payload.buckets, s.range, s.brush, GRANULARITY_MS[s.granularity],
      (sel) => {
        store.update({ brush: sel });
        controller.pending = refetchDetail();
      }));
  };

  const paintStacked = (payload: TransactionsPayload, range: [number, number]) => {
    clear(stackedSlot);
    const msps = [...new Set(payload.buckets.flatMap((b) => Object.keys(b.counts_by_msp)))];
    stackedSlot.append(stackedBarChart(
      payload.buckets, range, GRANULARITY_MS[store.get().granularity], mspColors(msps)));
  };

  const paintScatter = (payload: TransactionsPayload, range: [number, number]) => {
    clear(scatterSlot);
    const msps = [...new Set(payload.buckets.flatMap((b) => Object.keys(b.avg_size_by_msp)))];
    scatterSlot.append(sizeScatterChart(payload.buckets, range, mspColors(msps)));
  };

  const paintArea = (payload: TransactionsPayload) => {
    clear(areaSlot);
    const range = store.effectiveRange();
    areaSlot.append(latencyAreaChart(
      payload.latency, range, GRANULARITY_MS[store.get().granularity], enabledSeries));
  };

  const paintTable = (payload: TransactionsPayload) => {
    clear(tableSlot);
    const table = el("table", { class: "tx-table" });
    table.append(el("thead", {}, el("tr", {},
      el("th", {}, "time"), el("th", {}, "tx"), el("th", {}, "organization"),
      el("th", {}, "chaincode"), el("th", {}, "type"), el("th", {}, "size"),
      el("th", {}, "validation"))));
    const body = el("tbody", {});
    for (const row of payload.rows) {
      body.append(txRow(row));
    }
    table.append(body);
    tableSlot.append(
      el("p", { class: "row-count", "data-testid": "row-count" },
        `${payload.row_total} transactions`),
      table);
  };

  const txRow = (row: TxRow): HTMLTableRowElement => {
    const tr = el("tr", {
      class: "tx-row", "data-tx-id": row.tx_id, "data-msp": row.creator_msp,
    },
      el("td", {}, fmtTime(row.timestamp)),
      el("td", { class: "mono" }, row.tx_id.slice(0, 12)),
      el("td", {}, row.creator_msp),
      el("td", {}, row.chaincode || "(config)"),
      el("td", {}, row.tx_type),
      el("td", {}, fmtBytes(row.size_bytes)),
      el("td", { class: `validation-${row.validation_code.toLowerCase()}` },
        row.validation_code),
    );
    tr.addEventListener("click", () => {
      const existing = tr.nextElementSibling;
      if (existing?.classList.contains("rw-detail")) {
        existing.remove();
        return;
      }
      const detail = el("tr", { class: "rw-detail" });
      const cell = el("td", { colspan: "7" });
      const reads = row.read_set.map(
        (r) => `read ${r.key} @ (${r.version[0]}, ${r.version[1]})`);
      const writes = row.write_set.map(
        (w) => `${w.is_delete ? "delete" : "write"} ${w.key} = ${w.value_hash}`);
      const lines = [...reads, ...writes];
      cell.append(el("pre", { class: "rw-set" },
        lines.length ? lines.join("\n") : "(empty read/write set)"));
      detail.append(cell);
      tr.after(detail);
    });
    return tr;
  };

  async function fetchPayload(range: [number, number], signal: AbortSignal) {
    const s = store.get();
    return api.transactions({
      from: range[0],
      to: range[1],
      granularity: s.granularity,
      chaincode: s.chaincode,
      msp: s.msp,
      page_size: 200,
    }, { signal });
  }

  async function refetchNavigator(): Promise<void> {
    const payload = await gate.run("navigator",
      (signal) => fetchPayload(store.get().range, signal));
    if (payload) paintNavigator(payload);
  }

  async function refetchDetail(): Promise<void> {
    const range = store.effectiveRange();
    const payload = await gate.run("detail", (signal) => fetchPayload(range, signal));
    if (!payload) return; // superseded by a newer brush
    lastDetailPayload = payload;
    controller.lastDetail = payload;
    notice.classList.toggle("hidden", payload.row_total > 0);
    paintStacked(payload, range);
    paintScatter(payload, range);
    paintArea(payload);
    paintTable(payload);
  }

  async function refetchAll(): Promise<void> {
    syncControls();
    await Promise.all([refetchNavigator(), refetchDetail()]);
  }

  applyButton.addEventListener("click", () => {
    const from = Number(fromInput.value);
    const to = Number(toInput.value);
    if (!Number.isFinite(from) || !Number.isFinite(to) || to <= from) return;
    store.update({
      range: [from, to],
      granularity: granularitySelect.value as Granularity,
      chaincode: chaincodeInput.value.trim() || null,
      msp: mspInput.value.trim() || null,
    });
    controller.pending = refetchAll();
  });
  granularitySelect.addEventListener("change", () => {
    store.update({ granularity: granularitySelect.value as Granularity });
    controller.pending = refetchAll();
  });
  clearBrushButton.addEventListener("click", () => {
    store.update({ brush: null });
    controller.pending = refetchDetail();
  });

  const controller: TransactionsController = {
    pending: Promise.resolve(),
    lastDetail: null,
    refetchAll,
  };
  syncControls();
  controller.pending = refetchAll();
  return controller;
}
