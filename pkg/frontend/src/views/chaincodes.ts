// Chaincode inventory with latest-scan severity badges and a detail pane
// showing findings and the full scan history.

import type { ApiClient } from "../api.js";
import { clear, el } from "../dom.js";
import { fmtTime } from "../format.js";
import type { ChaincodeSummary } from "../types.js";

export interface ChaincodesController {
  ready: Promise<void>;
  openDetail(name: string): Promise<void>;
}

function badge(summary: ChaincodeSummary): HTMLElement {
  if (!summary.latest) {
    return el("span", { class: "badge badge-unscanned" }, "never scanned");
  }
  if (summary.latest.finding_count === 0) {
    return el("span", { class: "badge badge-clean" }, "no findings");
  }
  const severity = summary.latest.max_severity ?? "LOW";
  return el("span", { class: `badge badge-${severity.toLowerCase()}` }, severity);
}

export function renderChaincodes(root: HTMLElement, api: ApiClient): ChaincodesController {
  clear(root);
  const table = el("table", { class: "cc-table", "data-testid": "cc-table" });
  const detail = el("div", { class: "cc-detail hidden", "data-testid": "cc-detail" });
  root.append(el("h2", {}, "Chaincodes"), table, detail);

  const controller: ChaincodesController = {
    ready: Promise.resolve(),
    openDetail: async () => {},
  };

  controller.openDetail = async (name: string) => {
    detail.classList.remove("hidden");
    clear(detail);
    detail.append(el("h3", {}, `Scan history · ${name}`));
    try {
      const reports = await api.chaincodeScans(name);
      if (!reports.length) {
        detail.append(el("p", { class: "empty-state" }, "Never scanned."));
        return;
      }
      const [latest, ...history] = reports;
      if (!latest.findings.length) {
        detail.append(el("p", { class: "empty-state" }, "No findings in the latest scan."));
      } else {
        const findings = el("table", { class: "findings-table" },
          el("thead", {}, el("tr", {},
            el("th", {}, "rule"), el("th", {}, "function"),
            el("th", {}, "key / source"), el("th", {}, "severity"))));
        const body = el("tbody", {});
        for (const finding of latest.findings) {
          body.append(el("tr", { class: `finding finding-${finding.severity.toLowerCase()}` },
            el("td", {}, finding.rule),
            el("td", {}, finding.function),
            el("td", { class: "mono" }, finding.key_or_source),
            el("td", {}, finding.severity)));
        }
        findings.append(body);
        detail.append(findings);
      }
      const list = el("ul", { class: "scan-history" });
      for (const report of reports) {
        list.append(el("li", {},
          `${fmtTime(report.scanned_at)} · ${report.report_id} · `
          + `${report.findings.length} finding(s)`));
      }
      detail.append(el("h4", {}, `${reports.length} scan(s)`), list);
      void history;
    } catch {
      detail.append(el("p", { class: "empty-state" }, "Scan history unavailable."));
    }
  };

  controller.ready = (async () => {
    let summaries: ChaincodeSummary[];
    try {
      summaries = await api.chaincodes();
    } catch {
      root.append(el("p", { class: "empty-state" }, "Chaincode data unavailable."));
      return;
    }
    table.append(el("thead", {}, el("tr", {},
      el("th", {}, "chaincode"), el("th", {}, "latest scan"),
      el("th", {}, "findings"), el("th", {}, "scanned at"))));
    const body = el("tbody", {});
    for (const summary of summaries) {
      const row = el("tr", { class: "cc-row", "data-cc": summary.name },
        el("td", {}, summary.name),
        el("td", {}, badge(summary)),
        el("td", {}, summary.latest ? String(summary.latest.finding_count) : "—"),
        el("td", {}, summary.latest ? fmtTime(summary.latest.scanned_at) : "—"));
      row.addEventListener("click", () => void controller.openDetail(summary.name));
      body.append(row);
    }
    table.append(body);
  })();

  return controller;
}
